use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::engine::{compute_level, verify_level, Backend, EngineOptions, LevelCache, LevelInvariants, OracleLevel};
use super::spec::{ChainSpec, PredictedOrders};
use crate::error::{Error, Result};
use crate::supernatural::{PrimeSpectrumReport, SteinitzNumber};
use crate::truth::Truth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum NormalForm {
    Holds,
    FailsAt { level: usize },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub depth: usize,
    pub backend: Backend,
    pub levels: Vec<LevelInvariants>,
    /// `LCM{n_ℓ}` over the computed levels.
    pub steinitz_g: SteinitzNumber,
    /// `LCM{k*_ℓ}`; exact only when `d_stabilized`.
    pub steinitz_d: SteinitzNumber,
    pub d_stabilized: bool,
    /// `LCM{m_ℓ}`.
    pub steinitz_rel: SteinitzNumber,
    pub spectra_g: PrimeSpectrumReport,
    pub spectra_d: PrimeSpectrumReport,
    pub spectra_rel: PrimeSpectrumReport,
    pub lagrange_ok: bool,
    /// Levels where `k*` differs from `k`.
    pub k_gap: Vec<usize>,
    pub normal_form: NormalForm,
    pub prediction_consistent: Truth,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted: Option<PredictedOrders>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub citation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle: Option<Vec<OracleLevel>>,
}

fn lcm_of(mut values: impl Iterator<Item = u128>) -> Result<SteinitzNumber> {
    values.try_fold(SteinitzNumber::one(), |acc, v| acc.lcm(&SteinitzNumber::from_u128(v)?))
}

fn normal_form_of(levels: &[LevelInvariants]) -> NormalForm {
    if let Some(l) = levels.iter().find(|l| l.k_star.value < l.k) {
        return NormalForm::FailsAt { level: l.level };
    }
    if levels.iter().any(|l| !l.k_star.status.is_stabilized()) {
        NormalForm::Unknown
    } else {
        NormalForm::Holds
    }
}

fn divides_truth(a: &SteinitzNumber, b: &SteinitzNumber) -> Truth {
    match a.divides(b) {
        Ok(x) => x.into(),
        Err(_) => Truth::Unknown,
    }
}

fn prediction_truth(r: &ChainReport) -> Truth {
    match &r.predicted {
        None => Truth::Unknown,
        Some(p) => {
            // an unstabilized k* is only an upper bound and may overshoot
            let d = if r.d_stabilized { divides_truth(&r.steinitz_d, &p.discriminant) } else { Truth::Unknown };
            divides_truth(&r.steinitz_g, &p.group).and(divides_truth(&r.steinitz_rel, &p.relative)).and(d)
        }
    }
}

/// All levels up to `max_depth` with their truncated Steinitz orders.
pub fn chain_report(spec: &ChainSpec, opts: &EngineOptions) -> Result<ChainReport> {
    spec.validate()?;
    let mut cache = LevelCache::new(spec, opts.limit)?;
    let mut levels = Vec::with_capacity(spec.max_depth);
    for level in 1..=spec.max_depth {
        levels.push(compute_level(spec, &mut cache, level, opts)?);
    }
    assemble(spec, opts.backend, levels)
}

fn assemble(spec: &ChainSpec, backend: Backend, levels: Vec<LevelInvariants>) -> Result<ChainReport> {
    let steinitz_g = lcm_of(levels.iter().map(|l| l.n))?;
    let steinitz_rel = lcm_of(levels.iter().map(|l| l.m))?;
    let steinitz_d = lcm_of(levels.iter().map(|l| l.k_star.value))?;
    let mut report = ChainReport {
        depth: spec.max_depth,
        backend,
        d_stabilized: levels.iter().all(|l| l.k_star.status.is_stabilized()),
        k_gap: levels.iter().filter(|l| l.k_star.value != l.k).map(|l| l.level).collect(),
        normal_form: normal_form_of(&levels),
        spectra_g: steinitz_g.spectra(),
        spectra_d: steinitz_d.spectra(),
        spectra_rel: steinitz_rel.spectra(),
        steinitz_g,
        steinitz_d,
        steinitz_rel,
        levels,
        lagrange_ok: false,
        prediction_consistent: Truth::Unknown,
        predicted: spec.predicted.clone(),
        citation: spec.citation.clone(),
        oracle: None,
    };
    report.lagrange_ok = lagrange_check(&report);
    report.prediction_consistent = prediction_truth(&report);
    Ok(report)
}

/// Report plus an enumeration cross-check of every level that fits the limit.
pub fn chain_report_verified(spec: &ChainSpec, opts: &EngineOptions) -> Result<ChainReport> {
    let mut report = chain_report(spec, opts)?;
    let checks = report.levels.iter().map(|l| verify_level(spec, l, opts)).collect::<Result<Vec<_>>>()?;
    report.oracle = Some(checks);
    Ok(report)
}

/// `n = m·k` at each level, the truncated identity `Π_G = Π_rel · k_L`, and
/// `Π_rel · Π_D | Π_G`.
pub fn lagrange_check(report: &ChainReport) -> bool {
    let per_level = report.levels.iter().all(|l| l.m.checked_mul(l.k) == Some(l.n) && l.k_star.value <= l.k);
    let Some(last) = report.levels.last() else {
        return per_level;
    };
    let whole = SteinitzNumber::from_u128(last.k)
        .and_then(|k| report.steinitz_rel.mul(&k))
        .map(|prod| prod.same_as(&report.steinitz_g).is_true())
        .unwrap_or(false);
    let divides = report
        .steinitz_rel
        .mul(&report.steinitz_d)
        .and_then(|prod| prod.divides(&report.steinitz_g))
        .unwrap_or(false);
    per_level && whole && divides
}

/// `k* = k` at every level up to `depth`.
pub fn normal_form_check(spec: &ChainSpec, depth: usize, opts: &EngineOptions) -> Result<NormalForm> {
    if depth == 0 || depth > spec.max_depth {
        return Err(Error::invalid(format!("depth must lie in 1..={}", spec.max_depth)));
    }
    let mut cache = LevelCache::new(spec, opts.limit)?;
    let mut levels = Vec::new();
    for level in 1..=depth {
        levels.push(compute_level(spec, &mut cache, level, opts)?);
    }
    Ok(normal_form_of(&levels))
}

/// Check a report's internal identities; a failure is a bug, not bad input.
pub fn assert_consistent(report: &ChainReport) -> Result<()> {
    if !report.lagrange_ok {
        return Err(Error::InvariantViolation("Lagrange identity n = m·k fails".into()));
    }
    for w in report.levels.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.m <= a.m || b.m % a.m != 0 || b.n % a.n != 0 {
            return Err(Error::InvariantViolation(format!("indices are not a divisibility chain at level {}", b.level)));
        }
    }
    Ok(())
}

impl ChainReport {
    /// Aligned plain-text table followed by the Steinitz orders.
    pub fn to_text(&self) -> String {
        let headers = ["level", "m", "n", "k", "k*", "k* status", "core"];
        let rows: Vec<[String; 7]> = self
            .levels
            .iter()
            .map(|l| {
                [
                    l.level.to_string(),
                    l.m.to_string(),
                    l.n.to_string(),
                    l.k.to_string(),
                    l.k_star.value.to_string(),
                    match l.k_star.status {
                        super::engine::KStarStatus::Stabilized { depth } => format!("stabilized@{depth}"),
                        super::engine::KStarStatus::UpperBoundOnly => "upper-bound".into(),
                    },
                    l.core.as_ref().map(render_subgroup).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..headers.len())
            .map(|i| rows.iter().map(|r| r[i].chars().count()).chain([headers[i].len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |cells: Vec<&str>| -> String {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        writeln!(out, "{}", line(headers.to_vec())).ok();
        for r in &rows {
            writeln!(out, "{}", line(r.iter().map(String::as_str).collect())).ok();
        }
        writeln!(out).ok();
        writeln!(out, "truncation depth: {}", self.depth).ok();
        writeln!(out, "Pi[G]   = {}", self.steinitz_g).ok();
        writeln!(out, "Pi[G:D] = {}", self.steinitz_rel).ok();
        let flag = if self.d_stabilized { "" } else { "  (upper bound)" };
        writeln!(out, "Pi[D]   = {}{flag}", self.steinitz_d).ok();
        writeln!(out, "spectrum of Pi[G]: {}", self.spectra_g.pi).ok();
        writeln!(out, "lagrange: {}", if self.lagrange_ok { "ok" } else { "FAILED" }).ok();
        let nf = match self.normal_form {
            NormalForm::Holds => "holds".to_string(),
            NormalForm::FailsAt { level } => format!("fails at level {level}"),
            NormalForm::Unknown => "unknown".to_string(),
        };
        writeln!(out, "normal form: {nf}").ok();
        if let Some(p) = &self.predicted {
            writeln!(out, "predicted: Pi[G] = {}; Pi[G:D] = {}; Pi[D] = {}", p.group, p.relative, p.discriminant).ok();
            writeln!(out, "prediction consistent: {}", self.prediction_consistent).ok();
        }
        if let Some(c) = &self.citation {
            writeln!(out, "source: {c}").ok();
        }
        if let Some(checks) = &self.oracle {
            for c in checks {
                let note = c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
                writeln!(out, "oracle level {}: {}{note}", c.level, c.status).ok();
            }
        }
        out
    }
}

pub(crate) fn render_subgroup(s: &crate::finite_nilpotent::SubgroupDescriptor) -> String {
    use crate::finite_nilpotent::SubgroupDescriptor::*;
    match s {
        HeisenbergParametric(p) => format!("({}, {}, {})", p.m, p.n, p.p),
        AbelianLattice(l) => {
            let rows: Vec<String> = l.rows().iter().map(|r| format!("{r:?}")).collect();
            format!("hnf{}", rows.join(""))
        }
        FinitePreimage(f) => format!("preimage mod ({}, {}, {}) of {} elements", f.moduli.ma, f.moduli.mb, f.moduli.mc, f.elements.len()),
    }
}
