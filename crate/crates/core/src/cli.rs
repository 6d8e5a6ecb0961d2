//! Command-line front end for the `steinitz` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chain::{assert_consistent, chain_report, chain_report_verified, Backend, ChainSpec, EngineOptions};
use crate::dynamics::{classify_stability, wild_witness_search, ClassifyOptions};
use crate::error::{resource_limit, Error, Result};
use crate::families::{build_chain, catalog, FamilyDescriptor, FinitePrime, ToralParams};
use crate::solenoid::{compare_presentations, Presentation};
use crate::supernatural::{PrimeSpectrumReport, SteinitzNumber};

#[derive(Debug, Parser)]
#[command(name = "steinitz", version, about = "Steinitz orders, discriminants and stability of Cantor actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Enumeration threshold; defaults to STEINITZ_RESOURCE_LIMIT or 100000.
    #[arg(long, global = true)]
    limit: Option<u128>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleMode {
    Off,
    Verify,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Prime spectra of a Steinitz number, or of a family's orders.
    Spectra {
        /// Text form such as `2^inf · 3 · {p>=5}`, or JSON.
        number: Option<String>,
        #[command(flatten)]
        source: ChainSource,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Per-level invariants and truncated Steinitz orders of a chain.
    ChainInvariants {
        #[command(flatten)]
        source: ChainSource,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Look-ahead for k*; defaults to twice the level.
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, value_enum, default_value_t = OracleMode::Off)]
        oracle: OracleMode,
        #[arg(long, value_enum, default_value_t = BackendArg::ClosedForm)]
        backend: BackendArg,
    },
    /// Stable, wild or unknown, with the evidence.
    Classify {
        #[command(flatten)]
        source: ChainSource,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        shallow: usize,
        #[arg(long)]
        deep: Option<usize>,
    },
    /// Search for an element fixing a deep cylinder but not a shallow one.
    WildWitness {
        #[command(flatten)]
        source: ChainSource,
        #[arg(long, default_value_t = 1)]
        shallow: usize,
        #[arg(long, default_value_t = 2)]
        deep: usize,
    },
    /// Compare two solenoid presentation files.
    SolenoidCompare { first: PathBuf, second: PathBuf },
    /// Built-in families and their parameters.
    FamilyList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    ClosedForm,
    BruteForce,
    BruteForceDirect,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::ClosedForm => Backend::ClosedForm,
            BackendArg::BruteForce => Backend::BruteForce,
            BackendArg::BruteForceDirect => Backend::BruteForceDirect,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
struct ChainSource {
    /// Built-in family name (see `family-list`).
    #[arg(long)]
    family: Option<String>,
    /// Chain specification JSON file.
    #[arg(long, conflicts_with = "family")]
    spec: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    /// Comma-separated primes of the finite spectrum prefix.
    #[arg(long)]
    primes: Option<String>,
    /// `q:n` (toral) or `q:n:r` (Heisenberg) entries, comma-separated.
    #[arg(long = "pi-f")]
    pi_f: Option<String>,
    /// Comma-separated primes with infinite multiplicity.
    #[arg(long = "pi-infty")]
    pi_infty: Option<String>,
    /// Family parameters as a JSON object, or `key=value` pairs separated
    /// by `;`.
    #[arg(long)]
    params: Option<String>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::invalid(format!("bad {what} entry {t:?}"))))
        .collect()
}

fn require<T>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(format!("family {family} needs --{flag}")))
}

/// `key=value;key=value` into a JSON object, numbers where they parse.
fn params_from_pairs(s: &str) -> Result<Value> {
    let mut obj = serde_json::Map::new();
    for pair in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| Error::invalid(format!("expected key=value, got {pair:?}")))?;
        let v = v.trim();
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        obj.insert(k.trim().to_string(), value);
    }
    Ok(Value::Object(obj))
}

impl ChainSource {
    fn finite_primes(&self, family: &str) -> Result<Vec<FinitePrime>> {
        let Some(s) = &self.pi_f else { return Ok(Vec::new()) };
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                let parts: Vec<u64> = parse_list(&t.replace(':', ","), "pi-f")?;
                match parts[..] {
                    [q, n, r] => Ok(FinitePrime { q, n: n as u32, r: r as u32 }),
                    _ => Err(Error::invalid(format!("{family} expects --pi-f entries q:n:r, got {t:?}"))),
                }
            })
            .collect()
    }

    fn toral(&self) -> Result<ToralParams> {
        let pi_f = match &self.pi_f {
            None => Vec::new(),
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    let parts: Vec<u64> = parse_list(&t.replace(':', ","), "pi-f")?;
                    match parts[..] {
                        [q, n] => Ok((q, n as u32)),
                        _ => Err(Error::invalid(format!("toral-diagonal expects --pi-f entries q:n, got {t:?}"))),
                    }
                })
                .collect::<Result<_>>()?,
        };
        Ok(ToralParams { pi_f, pi_infty: self.pi_infty()? })
    }

    fn pi_infty(&self) -> Result<Vec<u64>> {
        self.pi_infty.as_deref().map_or(Ok(Vec::new()), |s| parse_list(s, "pi-infty"))
    }

    fn family(&self) -> Result<FamilyDescriptor> {
        let name = self.family.as_deref().ok_or_else(|| Error::invalid("give --family or --spec"))?;
        if let Some(raw) = &self.params {
            let params = match serde_json::from_str::<Value>(raw) {
                Ok(v @ Value::Object(_)) => v,
                _ => params_from_pairs(raw)?,
            };
            return FamilyDescriptor::from_json(&json!({ "name": name, "params": params }));
        }
        let f = match name {
            "toral-diagonal" => FamilyDescriptor::ToralDiagonal(self.toral()?),
            "heis-selfembed" => FamilyDescriptor::HeisenbergSelfEmbed { p: require(self.p, "p", name)? },
            "heis-stable" => FamilyDescriptor::HeisenbergStable { pi_f: self.finite_primes(name)?, pi_infty: self.pi_infty()? },
            "heis-wild" => {
                let n = require(self.n, "n", name)?;
                let r = require(self.r, "r", name)?;
                let mut prefix = self.finite_primes(name)?;
                if let Some(ps) = &self.primes {
                    prefix.extend(parse_list::<u64>(ps, "primes")?.into_iter().map(|q| FinitePrime { q, n, r }));
                }
                FamilyDescriptor::HeisenbergWild { prefix, n, r, pi_infty: self.pi_infty()? }
            }
            "toy-model" => FamilyDescriptor::ToyModel {
                p: require(self.p, "p", name)?,
                n: require(self.n, "n", name)?,
                k: require(self.k, "k", name)?,
            },
            "toral-product" => return Err(Error::invalid("toral-product takes its factors through --params")),
            "permutation-extension" => return Err(Error::invalid("permutation-extension is listed but not computed")),
            other => return Err(Error::invalid(format!("unknown family {other:?}; see family-list"))),
        };
        f.validate()?;
        Ok(f)
    }

    fn chain(&self, depth: usize) -> Result<ChainSpec> {
        if depth == 0 {
            return Err(Error::invalid("--depth must be at least 1"));
        }
        match &self.spec {
            Some(path) => {
                let mut spec = ChainSpec::from_json(&read_json(path)?)?;
                if depth < spec.max_depth {
                    spec.max_depth = depth;
                }
                Ok(spec)
            }
            None => {
                let f = self.family()?;
                let depth = f.depth_limit().map_or(depth, |d| depth.min(d));
                build_chain(&f, depth)
            }
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{} is not JSON: {e}", path.display())))
}

fn read_presentation(path: &Path) -> Result<Presentation> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    Presentation::from_json_str(&text)
}

fn parse_number(s: &str) -> Result<SteinitzNumber> {
    match serde_json::from_str::<Value>(s) {
        Ok(v @ Value::Array(_)) => SteinitzNumber::from_json(&v),
        _ => s.parse(),
    }
}

fn spectra_text(label: &str, n: &SteinitzNumber, s: &PrimeSpectrumReport) -> String {
    format!(
        "{label}: {n}\n  pi       = {}\n  pi_f     = {}\n  pi_infty = {}\n  pi_f infinite: {}\n",
        s.pi, s.pi_f, s.pi_infty, s.pi_f_is_infinite
    )
}

fn to_json_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn execute(cli: &Cli) -> Result<String> {
    let limit = cli.limit.unwrap_or_else(resource_limit);
    if limit == 0 {
        return Err(Error::invalid("--limit must be positive"));
    }
    let json_out = cli.format == Format::Json;
    match &cli.command {
        Command::Spectra { number, source, depth } => {
            let mut entries: Vec<(String, SteinitzNumber)> = Vec::new();
            match number {
                Some(s) => entries.push(("Pi".into(), parse_number(s)?)),
                None => {
                    let spec = source.chain(*depth)?;
                    let report = chain_report(&spec, &EngineOptions::default().with_limit(limit))?;
                    entries.push((format!("Pi[G] to depth {}", report.depth), report.steinitz_g));
                    entries.push((format!("Pi[G:D] to depth {}", report.depth), report.steinitz_rel));
                    entries.push((format!("Pi[D] to depth {}", report.depth), report.steinitz_d));
                    if let Some(p) = spec.predicted {
                        entries.push(("predicted Pi[G]".into(), p.group));
                        entries.push(("predicted Pi[G:D]".into(), p.relative));
                        entries.push(("predicted Pi[D]".into(), p.discriminant));
                    }
                }
            }
            if json_out {
                let items: Vec<Value> = entries
                    .iter()
                    .map(|(label, n)| json!({ "label": label, "order": n, "spectra": n.spectra() }))
                    .collect();
                Ok(to_json_string(&items))
            } else {
                Ok(entries.iter().map(|(label, n)| spectra_text(label, n, &n.spectra())).collect())
            }
        }
        Command::ChainInvariants { source, depth, cap, oracle, backend } => {
            let spec = source.chain(*depth)?;
            let mut opts = EngineOptions::default().with_limit(limit).with_backend((*backend).into());
            if let Some(c) = cap {
                opts = opts.with_cap(*c);
            }
            let report = match oracle {
                OracleMode::Off => chain_report(&spec, &opts)?,
                OracleMode::Verify => chain_report_verified(&spec, &opts)?,
            };
            assert_consistent(&report)?;
            Ok(if json_out { to_json_string(&report) } else { report.to_text() })
        }
        Command::Classify { source, depth, shallow, deep } => {
            let spec = source.chain(*depth)?;
            let opts = ClassifyOptions { limit, shallow: *shallow, deep: *deep };
            let c = classify_stability(&spec, &opts)?;
            if json_out {
                return Ok(to_json_string(&c));
            }
            let mut out = format!("verdict: {}\nreason: {}\nwitness search: {}\n", serde_json::to_value(c.verdict).expect("verdict").as_str().unwrap_or("?"), c.reason, c.search);
            if let Some(w) = &c.witness {
                out.push_str(&format!("witness: {}\n", serde_json::to_string(w).expect("witness serializes")));
            }
            Ok(out)
        }
        Command::WildWitness { source, shallow, deep } => {
            let spec = source.chain(*deep)?;
            let found = wild_witness_search(&spec, *shallow, *deep, limit)?;
            let value = match &found {
                Some(w) => serde_json::to_value(w).expect("witness serializes"),
                None => json!({
                    "witness": null,
                    "note": format!("no witness for levels ({shallow}, {deep}); this is not a proof of stability"),
                }),
            };
            if json_out || found.is_some() {
                Ok(to_json_string(&value))
            } else {
                Ok(format!("no witness for levels ({shallow}, {deep}); this is not a proof of stability\n"))
            }
        }
        Command::SolenoidCompare { first, second } => {
            let c = compare_presentations(&read_presentation(first)?, &read_presentation(second)?)?;
            Ok(if json_out { to_json_string(&c) } else { c.to_text() })
        }
        Command::FamilyList => {
            let rows = catalog();
            if json_out {
                return Ok(to_json_string(&rows));
            }
            let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
            let gw = rows.iter().map(|r| r.group.len()).max().unwrap_or(0);
            let mut out = String::new();
            for r in rows {
                let flag = if r.supported { "" } else { " [not supported]" };
                out.push_str(&format!("{:<width$}  {:<gw$}  {}{flag}\n    {}\n", r.name, r.group, r.summary, r.parameters));
            }
            Ok(out)
        }
    }
}

/// Run the front end; returns the process exit status. Errors are written to
/// `err` as a JSON object.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = writeln!(err, "{}", Error::invalid(e.to_string().trim()).to_json());
            return 2;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit_code()
        }
    }
}
