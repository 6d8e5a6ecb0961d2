use serde::{Deserialize, Serialize};

use super::spec::ChainSpec;
use crate::error::{resource_limit, Error, Result};
use crate::finite_nilpotent::oracle::{brute_force_core_oracle, oracle_moduli};
use crate::finite_nilpotent::{
    image_in_quotient, image_order, index, normal_core, quotient, sylow_decompose, FiniteQuotient, FiniteSubgroup,
    SubgroupDescriptor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Parametric cores and image orders; falls back to enumeration for
    /// explicit preimage subgroups.
    #[default]
    ClosedForm,
    /// Enumeration inside each Sylow factor of the working quotient.
    BruteForce,
    /// Enumeration in the whole working quotient.
    BruteForceDirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub limit: u128,
    /// Deepest level used for `k*` look-ahead; `None` means `2ℓ`.
    pub cap: Option<usize>,
    pub backend: Backend,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { limit: resource_limit(), cap: None, backend: Backend::ClosedForm }
    }
}

impl EngineOptions {
    pub fn with_backend(self, backend: Backend) -> Self {
        EngineOptions { backend, ..self }
    }

    pub fn with_limit(self, limit: u128) -> Self {
        EngineOptions { limit, ..self }
    }

    pub fn with_cap(self, cap: usize) -> Self {
        EngineOptions { cap: Some(cap), ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum KStarStatus {
    Stabilized { depth: usize },
    UpperBoundOnly,
}

impl KStarStatus {
    pub fn is_stabilized(&self) -> bool {
        matches!(self, KStarStatus::Stabilized { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KStar {
    pub value: u128,
    #[serde(flatten)]
    pub status: KStarStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelInvariants {
    pub level: usize,
    pub subgroup: SubgroupDescriptor,
    /// Normal core, when the backend produces it as a descriptor.
    pub core: Option<SubgroupDescriptor>,
    pub m: u128,
    pub n: u128,
    pub k: u128,
    pub k_star: KStar,
}

/// Subgroups of a chain, materialised on demand with nesting checks.
pub(crate) struct LevelCache<'a> {
    spec: &'a ChainSpec,
    limit: u128,
    levels: Vec<SubgroupDescriptor>,
}

impl<'a> LevelCache<'a> {
    pub(crate) fn new(spec: &'a ChainSpec, limit: u128) -> Result<Self> {
        Ok(LevelCache { spec, limit, levels: spec.subgroups(0, limit)? })
    }

    pub(crate) fn get(&mut self, level: usize) -> Result<&SubgroupDescriptor> {
        while self.levels.len() <= level {
            let next = self.levels.len();
            let s = self.spec.subgroup(next, self.limit)?;
            let prev = &self.levels[next - 1];
            let g = &self.spec.group;
            if !(crate::finite_nilpotent::is_subgroup(&s, prev)? && index(g, &s)? > index(g, prev)?) {
                return Err(Error::NestingViolation { level: next });
            }
            self.levels.push(s);
        }
        Ok(&self.levels[level])
    }
}

fn closed_form_available(s: &SubgroupDescriptor) -> bool {
    !matches!(s, SubgroupDescriptor::FinitePreimage(_))
}

/// Walk images `img(ℓ), img(ℓ+1), ...` until two consecutive values agree or
/// the image is trivial. A deeper level whose moduli overflow ends the walk
/// with an upper bound.
fn stabilize(level: usize, cap: usize, mut img: impl FnMut(usize) -> Result<u128>) -> Result<KStar> {
    let mut prev: Option<u128> = None;
    for j in level..=cap {
        let v = match (img(j), prev) {
            (Ok(v), _) => v,
            (Err(Error::Overflow(_)), Some(p)) => return Ok(KStar { value: p, status: KStarStatus::UpperBoundOnly }),
            (Err(e), _) => return Err(e),
        };
        if let Some(p) = prev {
            if v > p {
                return Err(Error::InvariantViolation(format!(
                    "image of level {j} in level {level} grew from {p} to {v}"
                )));
            }
        }
        if v == 1 || prev == Some(v) {
            return Ok(KStar { value: v, status: KStarStatus::Stabilized { depth: j } });
        }
        prev = Some(v);
    }
    Ok(KStar { value: prev.expect("cap >= level"), status: KStarStatus::UpperBoundOnly })
}

/// Counts gathered by enumeration in one working quotient.
struct Enumerated {
    m: u128,
    n: u128,
    k: u128,
    image: Option<u128>,
    core: Option<FiniteSubgroup>,
}

fn working_factors(q: &FiniteQuotient, backend: Backend) -> Result<Vec<FiniteQuotient>> {
    match backend {
        Backend::BruteForceDirect => Ok(vec![q.clone()]),
        _ => Ok(sylow_decompose(q)?.into_iter().map(|(_, f)| f).collect()),
    }
}

/// Enumerate `Γ_ℓ` (and optionally the image of a deeper `Γ_j`) inside `q`,
/// whose kernel must lie in every subgroup involved.
fn enumerate(
    q: &FiniteQuotient,
    shallow: &SubgroupDescriptor,
    deep: Option<&SubgroupDescriptor>,
    backend: Backend,
    limit: u128,
) -> Result<Enumerated> {
    let mut out = Enumerated { m: 1, n: 1, k: 1, image: deep.map(|_| 1), core: None };
    for f in working_factors(q, backend)? {
        let s = image_in_quotient(shallow, &f, limit)?;
        let core = brute_force_core_oracle(&s, limit)?;
        out.m *= f.order() / s.order();
        out.n *= f.order() / core.order();
        out.k *= s.order() / core.order();
        if let (Some(d), Some(img)) = (deep, out.image.as_mut()) {
            let sj = image_in_quotient(d, &f, limit)?;
            *img *= sj.order() / sj.intersect(&core)?.order();
        }
        if backend == Backend::BruteForceDirect {
            out.core = Some(core);
        }
    }
    Ok(out)
}

fn core_descriptor(core: &FiniteSubgroup) -> Option<SubgroupDescriptor> {
    match core.quotient() {
        FiniteQuotient::Heisenberg(m) => Some(SubgroupDescriptor::FinitePreimage(
            crate::finite_nilpotent::FinitePreimage { moduli: *m, elements: core.heis_elements().collect() },
        )),
        FiniteQuotient::Abelian(_) => None,
    }
}

pub(crate) fn effective_cap(spec: &ChainSpec, level: usize, opts: &EngineOptions) -> Result<usize> {
    let cap = opts.cap.unwrap_or(2 * level);
    if cap < level {
        return Err(Error::invalid(format!("look-ahead cap {cap} is below level {level}")));
    }
    Ok(cap.min(spec.lookahead_limit()))
}

pub(crate) fn compute_level(spec: &ChainSpec, cache: &mut LevelCache, level: usize, opts: &EngineOptions) -> Result<LevelInvariants> {
    let cap = effective_cap(spec, level, opts)?;
    let h = cache.get(level)?.clone();
    let terminal = spec.levels.is_terminal() && Some(level) == spec.levels.available_depth();
    let use_closed = opts.backend == Backend::ClosedForm && closed_form_available(&h);
    if use_closed {
        let m = index(&spec.group, &h)?;
        let core = normal_core(&spec.group, &h, opts.limit)?;
        let q = quotient(&spec.group, &core)?;
        let n = q.order();
        let k = image_order(&h, &q, opts.limit)?;
        let k_star = if terminal {
            KStar { value: k, status: KStarStatus::Stabilized { depth: level } }
        } else {
            stabilize(level, cap, |j| {
                let sj = cache.get(j)?.clone();
                if closed_form_available(&sj) {
                    image_order(&sj, &q, opts.limit)
                } else {
                    let f = oracle_moduli(&sj)?;
                    Ok(enumerate(&f, &h, Some(&sj), Backend::BruteForce, opts.limit)?.image.unwrap_or(1))
                }
            })?
        };
        return Ok(LevelInvariants { level, subgroup: h, core: Some(core), m, n, k, k_star });
    }
    let backend = if opts.backend == Backend::ClosedForm { Backend::BruteForce } else { opts.backend };
    let base = enumerate(&oracle_moduli(&h)?, &h, None, backend, opts.limit)?;
    let k_star = if terminal {
        KStar { value: base.k, status: KStarStatus::Stabilized { depth: level } }
    } else {
        stabilize(level, cap, |j| {
            let sj = cache.get(j)?.clone();
            let q = oracle_moduli(&sj)?;
            Ok(enumerate(&q, &h, Some(&sj), backend, opts.limit)?.image.unwrap_or(1))
        })?
    };
    Ok(LevelInvariants {
        level,
        core: base.core.as_ref().and_then(core_descriptor),
        subgroup: h,
        m: base.m,
        n: base.n,
        k: base.k,
        k_star,
    })
}

/// Invariants `m, n, k, k*` of level `ℓ`.
pub fn level_invariants(spec: &ChainSpec, level: usize, opts: &EngineOptions) -> Result<LevelInvariants> {
    if level == 0 || level > spec.max_depth {
        return Err(Error::invalid(format!("level must lie in 1..={}", spec.max_depth)));
    }
    let mut cache = LevelCache::new(spec, opts.limit)?;
    compute_level(spec, &mut cache, level, opts)
}

/// Order of the image of the inverse limit of the `D`'s in `D_ℓ`, found by
/// following bonding-map images up to `cap`.
pub fn k_star_compute(spec: &ChainSpec, level: usize, cap: usize, opts: &EngineOptions) -> Result<KStar> {
    Ok(level_invariants(spec, level, &opts.with_cap(cap))?.k_star)
}

/// Per-level comparison of the closed forms with enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLevel {
    pub level: usize,
    /// `verified`, `partial` (k* look-ahead too large) or `skipped`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Recompute a level by enumeration and compare. A disagreement is an
/// [`Error::InvariantViolation`]; oversized quotients are reported as skipped.
pub fn verify_level(spec: &ChainSpec, closed: &LevelInvariants, opts: &EngineOptions) -> Result<OracleLevel> {
    let level = closed.level;
    let skipped = |e: Error| -> Result<OracleLevel> {
        match e {
            Error::ResourceBound { needed, limit } => Ok(OracleLevel {
                level,
                status: "skipped".into(),
                note: Some(format!("working quotient of order {needed} exceeds limit {limit}")),
            }),
            other => Err(other),
        }
    };
    let h = &closed.subgroup;
    let q = oracle_moduli(h)?;
    let base = match enumerate(&q, h, None, Backend::BruteForceDirect, opts.limit) {
        Ok(b) => b,
        Err(e) => return skipped(e),
    };
    let mismatch = |what: &str, a: u128, b: u128| {
        Error::InvariantViolation(format!("level {level}: closed-form {what} = {a} but enumeration gives {b}"))
    };
    for (what, a, b) in [("m", closed.m, base.m), ("n", closed.n, base.n), ("k", closed.k, base.k)] {
        if a != b {
            return Err(mismatch(what, a, b));
        }
    }
    if let (Some(core), Some(found)) = (&closed.core, &base.core) {
        let expected = image_in_quotient(core, &q, opts.limit)?;
        if &expected != found {
            return Err(Error::InvariantViolation(format!("level {level}: closed-form core differs from the enumerated core")));
        }
    }
    let mut cache = LevelCache::new(spec, opts.limit)?;
    let brute = EngineOptions { backend: Backend::BruteForce, ..*opts };
    match compute_level(spec, &mut cache, level, &brute) {
        Ok(b) if b.k_star == closed.k_star => Ok(OracleLevel { level, status: "verified".into(), note: None }),
        Ok(b) => Err(mismatch("k*", closed.k_star.value, b.k_star.value)),
        Err(Error::ResourceBound { needed, .. }) => Ok(OracleLevel {
            level,
            status: "partial".into(),
            note: Some(format!("m, n, k and core verified; k* look-ahead needs {needed} elements")),
        }),
        Err(e) => Err(e),
    }
}
