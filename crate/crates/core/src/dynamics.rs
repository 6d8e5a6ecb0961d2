//! Coset actions at finite levels, wildness witnesses and stability verdicts.
//!
//! A cylinder `U_ℓ` at truncation `T` is the set of cosets `hΓ_T` with
//! `h ∈ Γ_ℓ`. An element `g` fixes `hΓ_T` exactly when `h⁻¹gh ∈ Γ_T`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, LevelCache};
use crate::error::{check_bound, Error, Result};
use crate::finite_nilpotent::oracle::left_coset_reps;
use crate::finite_nilpotent::{
    image_in_quotient, index, normal_core, FiniteQuotient, GroupDescriptor, GroupElement, HeisElem, HeisModuli, Parametric,
    SubgroupDescriptor,
};
use crate::supernatural::primes::{factorize, lcm, valuation};
use crate::supernatural::Exponent;

/// `Γ` acting on `X_ℓ = Γ/Γ_ℓ`, with coset 0 the basepoint.
#[derive(Debug, Clone)]
pub struct LevelAction {
    pub level: usize,
    pub subgroup: SubgroupDescriptor,
    reps: Vec<GroupElement>,
    lookup: HashMap<GroupElement, usize>,
    labeller: Labeller,
}

#[derive(Debug, Clone)]
enum Labeller {
    Parametric(Parametric),
    Lattice(crate::finite_nilpotent::Lattice),
    Preimage { quotient: FiniteQuotient, members: Vec<GroupElement> },
}

impl Labeller {
    fn canonical(&self, g: &GroupElement) -> GroupElement {
        match (self, g) {
            (Labeller::Parametric(p), GroupElement::Heisenberg(h)) => GroupElement::Heisenberg(p.coset_rep(h)),
            (Labeller::Lattice(l), GroupElement::Vector(v)) => GroupElement::Vector(l.reduce(v)),
            (Labeller::Preimage { quotient, members }, _) => members
                .iter()
                .map(|t| quotient.mul(&quotient.reduce(g), t))
                .min_by_key(|x| quotient.index_of(x))
                .expect("subgroup is non-empty"),
            _ => panic!("element does not belong to the chain's group"),
        }
    }
}

impl LevelAction {
    pub fn new(spec: &ChainSpec, level: usize, limit: u128) -> Result<Self> {
        let subgroup = spec.subgroup(level, limit)?;
        let count = index(&spec.group, &subgroup)?;
        check_bound(count, limit)?;
        let (labeller, reps): (Labeller, Vec<GroupElement>) = match &subgroup {
            SubgroupDescriptor::HeisenbergParametric(p) => {
                let mut reps = Vec::with_capacity(count as usize);
                for a in 0..p.m {
                    for b in 0..p.n {
                        for c in 0..p.p {
                            reps.push(GroupElement::Heisenberg(HeisElem::new(a, b, c)));
                        }
                    }
                }
                (Labeller::Parametric(*p), reps)
            }
            SubgroupDescriptor::AbelianLattice(l) => {
                (Labeller::Lattice(l.clone()), l.coset_reps().map(GroupElement::Vector).collect())
            }
            SubgroupDescriptor::FinitePreimage(f) => {
                let quotient = FiniteQuotient::Heisenberg(f.moduli);
                let s = image_in_quotient(&subgroup, &quotient, limit)?;
                let members: Vec<GroupElement> = s.elements().collect();
                let labeller = Labeller::Preimage { quotient: quotient.clone(), members };
                let reps = left_coset_reps(&s, limit)?.into_iter().map(|i| labeller.canonical(&quotient.element_at(i))).collect();
                (labeller, reps)
            }
        };
        let mut reps = reps;
        let identity = spec.group.identity();
        let base = labeller.canonical(&identity);
        if let Some(pos) = reps.iter().position(|r| *r == base) {
            reps.swap(0, pos);
        }
        let lookup = reps.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        Ok(LevelAction { level, subgroup, reps, lookup, labeller })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn rep(&self, i: usize) -> &GroupElement {
        &self.reps[i]
    }

    /// Coset containing `g`.
    pub fn locate(&self, g: &GroupElement) -> usize {
        self.lookup[&self.labeller.canonical(g)]
    }

    /// `g · (coset i)`.
    pub fn act(&self, group: &GroupDescriptor, g: &GroupElement, i: usize) -> Result<usize> {
        Ok(self.locate(&group.mul(g, &self.reps[i])?))
    }
}

/// Cosets of `X_ℓ` fixed by `g`.
pub fn fixed_cosets(spec: &ChainSpec, g: &GroupElement, level: usize, limit: u128) -> Result<BTreeSet<usize>> {
    let action = LevelAction::new(spec, level, limit)?;
    fixed_in(&action, &spec.group, g)
}

fn fixed_in(action: &LevelAction, group: &GroupDescriptor, g: &GroupElement) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for i in 0..action.len() {
        if action.act(group, g, i)? == i {
            out.insert(i);
        }
    }
    Ok(out)
}

fn parametric(s: &SubgroupDescriptor) -> Result<Parametric> {
    match s {
        SubgroupDescriptor::HeisenbergParametric(p) => Ok(*p),
        _ => Err(Error::invalid("this search needs parametric Heisenberg levels")),
    }
}

/// `h⁻¹ g h ∈ inner` for all `h` in `outer`; returns a moved `h` otherwise.
/// The conjugate `(a, b, c - xb + ya)` is affine in `(x, y)`, so the
/// generators of `outer` and the identity suffice.
fn cylinder_mover(g: &HeisElem, outer: &Parametric, inner: &Parametric) -> Option<HeisElem> {
    [HeisElem::IDENTITY, HeisElem::new(outer.m, 0, 0), HeisElem::new(0, outer.n, 0)]
        .into_iter()
        .find(|h| !inner.contains(&h.inv().mul(g).mul(h)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationCheck {
    pub depth: usize,
    /// Cylinder cosets of the deep level that were checked to be fixed.
    pub fixed_cylinders_checked: u128,
    /// `enumerated` or `generators`.
    pub method: String,
    /// Coset of the shallow cylinder that the element moves.
    pub moved_cylinder: HeisElem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WildnessWitness {
    pub shallow_level: usize,
    pub deep_level: usize,
    /// Representative in the quotient by the deepest checked core.
    pub element: HeisElem,
    pub moduli: HeisModuli,
    pub fixed_cylinders_checked: u128,
    pub moved_cylinder: HeisElem,
    pub transcript: Vec<TruncationCheck>,
}

/// Deepest truncation used to confirm a candidate for the pair `(ℓ, ℓ')`.
fn witness_horizon(shallow: usize, deep: usize) -> usize {
    deep + 1 + (deep - shallow).max(1)
}

/// Elements `(xM, yN, zP)` of `D` modulo the core; with `prime` set, only
/// those of `prime`-power order.
fn discriminant_grid(h: &Parametric, core: &HeisModuli, prime: Option<u64>) -> (u128, impl Iterator<Item = HeisElem>) {
    let step = |m: i128, modulus: i128| match prime {
        None => m,
        Some(p) => {
            let cofactor = modulus / (p as i128).pow(valuation(modulus as u128, p) as u32);
            lcm(m as u128, cofactor as u128) as i128
        }
    };
    let (sa, sb, sc) = (step(h.m, core.ma), step(h.n, core.mb), step(h.p, core.mc));
    let count = (core.ma / sa) as u128 * (core.mb / sb) as u128 * (core.mc / sc) as u128;
    let core = *core;
    let iter = (0..core.ma / sa).flat_map(move |x| {
        (0..core.mb / sb).flat_map(move |y| (0..core.mc / sc).map(move |z| HeisElem::new(x * sa, y * sb, z * sc)))
    });
    (count, iter)
}

fn in_sylow(g: &HeisElem, core: &HeisModuli, p: u64) -> bool {
    let cofactor = |m: i128| m / (p as i128).pow(valuation(m as u128, p) as u32);
    g.a % cofactor(core.ma) == 0 && g.b % cofactor(core.mb) == 0 && g.c % cofactor(core.mc) == 0
}

/// Check one candidate at every truncation in `deep+1..=horizon`.
fn check_candidate(g: &HeisElem, shallow: &Parametric, deep: &Parametric, truncations: &[(usize, Parametric)]) -> Option<Vec<TruncationCheck>> {
    let mut transcript = Vec::new();
    for (t, gamma_t) in truncations {
        if cylinder_mover(g, deep, gamma_t).is_some() {
            return None;
        }
        let moved = cylinder_mover(g, shallow, gamma_t)?;
        transcript.push(TruncationCheck { depth: *t, fixed_cylinders_checked: 3, method: "generators".into(), moved_cylinder: moved });
    }
    Some(transcript)
}

/// Search for `g` in the closure that fixes the cylinder `U_ℓ'` pointwise but
/// moves a point of `U_ℓ`, over `ℓ' ∈ (ℓ, max_deep]`. `None` is evidence of
/// stability at this depth, not proof.
pub fn wild_witness_search(spec: &ChainSpec, shallow: usize, max_deep: usize, limit: u128) -> Result<Option<WildnessWitness>> {
    if shallow >= max_deep || max_deep > spec.max_depth {
        return Err(Error::invalid(format!("need shallow < deep <= {}, got {shallow} and {max_deep}", spec.max_depth)));
    }
    if matches!(spec.group, GroupDescriptor::FreeAbelian { .. }) {
        return Ok(None);
    }
    let mut cache = LevelCache::new(spec, limit)?;
    for deep in shallow + 1..=max_deep {
        let horizon = witness_horizon(shallow, deep).min(spec.lookahead_limit());
        if horizon <= deep {
            continue;
        }
        let gamma_l = parametric(cache.get(shallow)?)?;
        let gamma_d = parametric(cache.get(deep)?)?;
        // confirm as deep as the moduli fit, but at least one level past ℓ'
        let mut truncations: Vec<(usize, Parametric)> = Vec::new();
        for t in deep + 1..=horizon {
            match cache.get(t) {
                Ok(s) => truncations.push((t, parametric(s)?)),
                Err(Error::Overflow(_)) if !truncations.is_empty() => break,
                Err(e) => return Err(e),
            }
        }
        let last = truncations.last().expect("horizon > deep").1;
        let core = last.core_moduli();
        let k_of = |p: &Parametric| {
            let c = p.core_moduli();
            (c.ma / p.m) as u128 * (c.mb / p.n) as u128
        };
        let prev = parametric(cache.get(deep - 1)?)?;
        let (k_new, k_old) = (k_of(&gamma_d), k_of(&prev));
        let new_primes: Vec<u64> =
            factorize(k_new).into_iter().filter(|&(p, e)| e > valuation(k_old, p)).map(|(p, _)| p).collect();
        let found = |g: &HeisElem| -> Option<WildnessWitness> {
            if g.is_identity() {
                return None;
            }
            let transcript = check_candidate(g, &gamma_l, &gamma_d, &truncations)?;
            Some(WildnessWitness {
                shallow_level: shallow,
                deep_level: deep,
                element: *g,
                moduli: core,
                fixed_cylinders_checked: 0,
                moved_cylinder: transcript[0].moved_cylinder,
                transcript,
            })
        };
        // newest Sylow factors first, then everything else
        for &p in &new_primes {
            let (count, elems) = discriminant_grid(&last, &core, Some(p));
            check_bound(count, limit)?;
            if let Some(w) = elems.into_iter().find_map(|g| found(&g)) {
                return verify_witness(spec, &w, limit).map(Some);
            }
        }
        let (count, elems) = discriminant_grid(&last, &core, None);
        check_bound(count, limit)?;
        let mut fresh = elems.filter(|g| !new_primes.iter().any(|&p| in_sylow(g, &core, p)));
        if let Some(w) = fresh.find_map(|g| found(&g)) {
            return verify_witness(spec, &w, limit).map(Some);
        }
    }
    Ok(None)
}

/// Re-check a witness without the search's shortcuts where the cylinder is
/// small enough to enumerate. Returns the witness with the transcript filled
/// in, or an invariant violation if it does not hold up.
pub fn verify_witness(spec: &ChainSpec, w: &WildnessWitness, limit: u128) -> Result<WildnessWitness> {
    let shallow = parametric(&spec.subgroup(w.shallow_level, limit)?)?;
    let deep = parametric(&spec.subgroup(w.deep_level, limit)?)?;
    let g = w.element;
    let fail = |msg: String| Error::InvariantViolation(format!("witness check failed: {msg}"));
    let mut out = w.clone();
    out.transcript.clear();
    out.fixed_cylinders_checked = 0;
    for check in &w.transcript {
        let gamma_t = parametric(&spec.subgroup(check.depth, limit)?)?;
        if !gamma_t.is_subgroup_of(&deep) || !deep.is_subgroup_of(&shallow) {
            return Err(fail("levels are not nested".into()));
        }
        let count = gamma_t.index() / deep.index();
        let (checked, method) = if count <= limit {
            for h in deep.relative_coset_reps(&gamma_t) {
                if !gamma_t.contains(&h.inv().mul(&g).mul(&h)) {
                    return Err(fail(format!("cylinder coset {h:?} at depth {} is moved", check.depth)));
                }
            }
            (count, "enumerated")
        } else {
            if cylinder_mover(&g, &deep, &gamma_t).is_some() {
                return Err(fail(format!("deep cylinder moved at depth {}", check.depth)));
            }
            (3, "generators")
        };
        let h = check.moved_cylinder;
        if !shallow.contains(&h) || gamma_t.contains(&h.inv().mul(&g).mul(&h)) {
            return Err(fail(format!("recorded shallow coset is not moved at depth {}", check.depth)));
        }
        out.fixed_cylinders_checked += checked;
        out.transcript.push(TruncationCheck { depth: check.depth, fixed_cylinders_checked: checked, method: method.into(), moved_cylinder: h });
    }
    if out.transcript.is_empty() {
        return Err(fail("empty transcript".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeHit {
    pub element: GroupElement,
    /// Levels `ℓ < depth` whose whole cylinder the element fixes.
    pub fixed_cylinders: Vec<usize>,
    /// The element lies in the deepest core, so it fixes everything at
    /// this truncation.
    pub acts_trivially_at_truncation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub word_radius: usize,
    pub depth: usize,
    pub elements_tested: usize,
    /// Non-identity elements fixing a whole cylinder while acting
    /// non-trivially at the truncation.
    pub certificates: Vec<ProbeHit>,
    /// Elements that only look fixed because the truncation is too shallow.
    pub truncation_artifacts: Vec<ProbeHit>,
}

fn word_ball(group: &GroupDescriptor, radius: usize, limit: u128) -> Result<Vec<GroupElement>> {
    let gens: Vec<GroupElement> = group.generators().into_iter().flat_map(|g| [group.inv(&g), g]).collect();
    let id = group.identity();
    let mut seen: HashSet<GroupElement> = HashSet::from([id.clone()]);
    let mut frontier = VecDeque::from([(id, 0usize)]);
    let mut out = Vec::new();
    while let Some((g, d)) = frontier.pop_front() {
        if d == radius {
            continue;
        }
        for s in &gens {
            let h = group.mul(&g, s)?;
            if seen.insert(h.clone()) {
                check_bound(seen.len() as u128, limit)?;
                out.push(h.clone());
                frontier.push_back((h, d + 1));
            }
        }
    }
    Ok(out)
}

/// Which short words fix a whole cylinder `U_ℓ`, `ℓ < depth`, at truncation
/// `depth`.
pub fn topological_freeness_probe(spec: &ChainSpec, word_radius: usize, depth: usize, limit: u128) -> Result<FreenessReport> {
    if depth == 0 || depth > spec.max_depth {
        return Err(Error::invalid(format!("depth must lie in 1..={}", spec.max_depth)));
    }
    let levels = spec.subgroups(depth, limit)?;
    let gamma_t = &levels[depth];
    let ball = word_ball(&spec.group, word_radius, limit)?;
    let mut report = FreenessReport {
        word_radius,
        depth,
        elements_tested: ball.len(),
        certificates: Vec::new(),
        truncation_artifacts: Vec::new(),
    };
    for g in ball {
        if !gamma_t.contains(&g) {
            continue;
        }
        let (fixed, trivial) = match (&g, gamma_t) {
            (GroupElement::Vector(_), _) => ((0..depth).collect(), true),
            (GroupElement::Heisenberg(h), SubgroupDescriptor::HeisenbergParametric(pt)) => {
                let mut fixed = Vec::new();
                for (l, s) in levels.iter().enumerate().take(depth) {
                    if cylinder_mover(h, &parametric(s)?, pt).is_none() {
                        fixed.push(l);
                    }
                }
                (fixed, pt.core().contains(h))
            }
            _ => return Err(Error::invalid("the probe needs parametric or lattice levels")),
        };
        if fixed.is_empty() {
            continue;
        }
        let hit = ProbeHit { element: g, fixed_cylinders: fixed, acts_trivially_at_truncation: trivial };
        if trivial {
            report.truncation_artifacts.push(hit);
        } else {
            report.certificates.push(hit);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    Wild,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub reason: String,
    /// Spectral certificate of stability, when one applies.
    pub certificate: Option<String>,
    pub witness: Option<WildnessWitness>,
    /// Outcome of the witness search: `found`, `none`, `skipped: ...`.
    pub search: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub limit: u128,
    pub shallow: usize,
    /// Deepest `ℓ'` searched; `None` means `min(max_depth, max(ℓ+1, 2ℓ))`.
    pub deep: Option<usize>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { limit: crate::error::resource_limit(), shallow: 1, deep: None }
    }
}

fn stability_certificate(spec: &ChainSpec) -> Option<String> {
    if matches!(spec.group, GroupDescriptor::FreeAbelian { .. }) {
        return Some("abelian group: every core is the level itself, so the discriminant is trivial and its prime spectrum finite".into());
    }
    let p = spec.predicted.as_ref()?;
    let d = p.discriminant.spectra();
    if d.pi.is_finite() {
        return Some(format!(
            "nilpotent action whose discriminant has finite prime spectrum {} (Pi[D] = {})",
            d.pi, p.discriminant
        ));
    }
    let small = p.group.tails().iter().all(|t| t.pattern().iter().all(|e| matches!(e, Exponent::Finite(n) if *n <= 2)));
    if small {
        return Some(format!(
            "nilpotent action whose Pi[G] = {} has prime multiplicities at most 2 outside a finite set",
            p.group
        ));
    }
    None
}

/// First level from which `|Γ_ℓ : core(Γ_ℓ)|` agrees with its value at
/// `max_depth`.
fn discriminant_settles_at(spec: &ChainSpec, limit: u128) -> Result<usize> {
    let mut cache = LevelCache::new(spec, limit)?;
    let mut ks = Vec::with_capacity(spec.max_depth);
    for level in 1..=spec.max_depth {
        let s = cache.get(level)?.clone();
        let core = normal_core(&spec.group, &s, limit)?;
        ks.push(index(&spec.group, &core)? / index(&spec.group, &s)?);
    }
    let last = ks.last().copied().unwrap_or(1);
    Ok(ks.iter().rposition(|&k| k != last).map_or(1, |i| i + 2))
}

/// Stable by spectral certificate, wild by witness, otherwise unknown.
///
/// Stability still allows non-free restrictions below some level, so with a
/// finite discriminant certificate the search starts once the level-wise
/// discriminant has settled. A witness from there on contradicts the
/// certificate and is reported as an invariant violation.
pub fn classify_stability(spec: &ChainSpec, opts: &ClassifyOptions) -> Result<Classification> {
    let certificate = stability_certificate(spec);
    let finite_d = spec.predicted.as_ref().is_some_and(|p| p.discriminant.spectra().pi.is_finite());
    let shallow = match (&certificate, finite_d) {
        (Some(_), true) => opts.shallow.max(discriminant_settles_at(spec, opts.limit).unwrap_or(opts.shallow)),
        _ => opts.shallow,
    };
    let deep = opts.deep.unwrap_or_else(|| spec.max_depth.min((shallow + 1).max(2 * shallow)));
    let (witness, search) = if matches!(spec.group, GroupDescriptor::FreeAbelian { .. }) {
        (None, "none: abelian actions are free".to_string())
    } else if shallow == 0 || deep <= shallow {
        (None, format!("skipped: chain depth {} leaves no deeper level after {shallow}", spec.max_depth))
    } else {
        match wild_witness_search(spec, shallow, deep, opts.limit) {
            Ok(Some(w)) => (Some(w), format!("found at levels ({shallow}, {deep})")),
            Ok(None) => (None, format!("none up to level {deep} (inconclusive)")),
            Err(Error::ResourceBound { needed, limit }) => {
                (None, format!("skipped: search needs {needed} candidates, limit {limit}"))
            }
            Err(e @ (Error::InvalidInput(_) | Error::Overflow(_))) => (None, format!("skipped: {e}")),
            Err(e) => return Err(e),
        }
    };
    let (verdict, reason) = match (&certificate, &witness) {
        (Some(_), Some(w)) => {
            return Err(Error::InvariantViolation(format!(
                "stability certificate and wildness witness at levels ({}, {}) for the same chain",
                w.shallow_level, w.deep_level
            )))
        }
        (Some(c), None) => (Verdict::Stable, c.clone()),
        (None, Some(w)) => (
            Verdict::Wild,
            format!(
                "element ({}, {}, {}) fixes the level-{} cylinder pointwise but moves a point of the level-{} cylinder",
                w.element.a, w.element.b, w.element.c, w.deep_level, w.shallow_level
            ),
        ),
        (None, None) => (Verdict::Unknown, "no spectral certificate and no witness at the searched depth".into()),
    };
    Ok(Classification { verdict, reason, certificate, witness, search })
}
