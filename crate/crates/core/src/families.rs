//! Preset chains with known Steinitz orders.
//!
//! Supported names: `toral-diagonal`, `toral-product`, `heis-selfembed`,
//! `heis-stable`, `heis-wild`, `toy-model`.
//!
//! The cyclic-permutation extension `Z^k ⋊ C_k` of a toral action is not
//! provided. Its acting group is neither free abelian nor Heisenberg. The
//! point it makes is recorded here instead: restricting that action to the
//! clopen set of the identity coset of `C_k` gives the plain odometer, so the
//! two actions are return equivalent, yet the Steinitz order of the extension
//! picks up the primes dividing `k`. Return equivalence therefore preserves
//! Steinitz orders only up to such divisors.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::{ChainSpec, LevelRule, PredictedOrders};
use crate::error::{Error, Result};
use crate::finite_nilpotent::{GroupDescriptor, SubgroupDescriptor};
use crate::supernatural::primes::{is_prime, next_prime};
use crate::supernatural::{Exponent, PrimeStream, SteinitzNumber, TailRule};
use crate::truth::Truth;

/// A prime of the finite spectrum with its multiplicity `n` and the exponent
/// `r` used for the `a`-coordinate modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinitePrime {
    pub q: u64,
    pub n: u32,
    pub r: u32,
}

/// One coordinate of a diagonal toral chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToralParams {
    /// `(q, n(q))` pairs, entering one per level.
    pub pi_f: Vec<(u64, u32)>,
    /// Primes entering one per level with exponent equal to the level.
    pub pi_infty: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "kebab-case")]
pub enum FamilyDescriptor {
    ToralDiagonal(ToralParams),
    ToralProduct { factors: Vec<ToralParams> },
    #[serde(rename = "heis-selfembed")]
    HeisenbergSelfEmbed { p: u64 },
    #[serde(rename = "heis-stable")]
    HeisenbergStable { pi_f: Vec<FinitePrime>, pi_infty: Vec<u64> },
    /// Infinite finite-spectrum: the listed prefix, then every later prime
    /// outside `pi_infty` with the default `(n, r)`.
    #[serde(rename = "heis-wild")]
    HeisenbergWild { prefix: Vec<FinitePrime>, n: u32, r: u32, pi_infty: Vec<u64> },
    /// `k` is the `r` of [`FinitePrime`]: the isotropy `(p^k, p^n, p^n)` has
    /// order `p^(n-k)` in `H(Z/p^n)`.
    ToyModel { p: u64, n: u32, k: u32 },
}

fn checked_pow(base: u64, exp: u64) -> Result<i128> {
    let e = u32::try_from(exp).map_err(|_| Error::Overflow("level modulus".into()))?;
    (base as i128).checked_pow(e).ok_or_else(|| Error::Overflow("level modulus".into()))
}

fn checked_mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(|| Error::Overflow("level modulus".into()))
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{p} is not prime")))
    }
}

fn require_distinct(primes: &[u64]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for &p in primes {
        require_prime(p)?;
        if !seen.insert(p) {
            return Err(Error::invalid(format!("prime {p} appears twice; the finite and infinite prime sets must be disjoint")));
        }
    }
    Ok(())
}

fn validate_finite_primes(fs: &[FinitePrime]) -> Result<()> {
    for f in fs {
        if f.r < 1 || f.r > f.n {
            return Err(Error::invalid(format!("prime {} needs 1 <= r <= n, got n = {}, r = {}", f.q, f.n, f.r)));
        }
    }
    Ok(())
}

/// `∏_{i<=min(ℓ,|list|)} p_i^ℓ`.
fn growing_part(pi_infty: &[u64], level: usize) -> Result<i128> {
    pi_infty.iter().take(level).try_fold(1i128, |acc, &p| checked_mul(acc, checked_pow(p, level as u64)?))
}

fn infinite_part(pi_infty: &[u64]) -> Result<SteinitzNumber> {
    SteinitzNumber::from_pairs(pi_infty.iter().map(|&p| (p, Exponent::Infinity)))
}

impl ToralParams {
    fn validate(&self) -> Result<()> {
        let all: Vec<u64> = self.pi_f.iter().map(|&(q, _)| q).chain(self.pi_infty.iter().copied()).collect();
        require_distinct(&all)?;
        if let Some(&(q, _)) = self.pi_f.iter().find(|&&(_, n)| n == 0) {
            return Err(Error::invalid(format!("multiplicity of {q} must be at least 1")));
        }
        if self.pi_f.is_empty() && self.pi_infty.is_empty() {
            return Err(Error::invalid("a toral chain needs at least one prime"));
        }
        Ok(())
    }

    /// Generator of `Γ_ℓ ⊂ Z`.
    fn modulus(&self, level: usize) -> Result<i128> {
        let finite = self
            .pi_f
            .iter()
            .take(level)
            .try_fold(1i128, |acc, &(q, n)| checked_mul(acc, checked_pow(q, n as u64)?))?;
        checked_mul(finite, growing_part(&self.pi_infty, level)?)
    }

    /// Levels before the chain stops growing; unbounded with infinite primes.
    fn depth_limit(&self) -> Option<usize> {
        if self.pi_infty.is_empty() {
            Some(self.pi_f.len())
        } else {
            None
        }
    }

    fn predicted_group(&self) -> Result<Option<SteinitzNumber>> {
        if self.pi_infty.is_empty() {
            return Ok(None);
        }
        let finite = SteinitzNumber::from_pairs(self.pi_f.iter().map(|&(q, n)| (q, Exponent::Finite(n as u64))))?;
        Ok(Some(finite.mul(&infinite_part(&self.pi_infty)?)?))
    }
}

impl FamilyDescriptor {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyDescriptor::ToralDiagonal(_) => "toral-diagonal",
            FamilyDescriptor::ToralProduct { .. } => "toral-product",
            FamilyDescriptor::HeisenbergSelfEmbed { .. } => "heis-selfembed",
            FamilyDescriptor::HeisenbergStable { .. } => "heis-stable",
            FamilyDescriptor::HeisenbergWild { .. } => "heis-wild",
            FamilyDescriptor::ToyModel { .. } => "toy-model",
        }
    }

    pub fn group(&self) -> GroupDescriptor {
        match self {
            FamilyDescriptor::ToralDiagonal(_) => GroupDescriptor::FreeAbelian { rank: 1 },
            FamilyDescriptor::ToralProduct { factors } => GroupDescriptor::FreeAbelian { rank: factors.len() },
            _ => GroupDescriptor::Heisenberg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FamilyDescriptor::ToralDiagonal(t) => t.validate(),
            FamilyDescriptor::ToralProduct { factors } => {
                if factors.is_empty() {
                    return Err(Error::invalid("toral-product needs at least one factor"));
                }
                factors.iter().try_for_each(ToralParams::validate)
            }
            FamilyDescriptor::HeisenbergSelfEmbed { p } => require_prime(*p),
            FamilyDescriptor::HeisenbergStable { pi_f, pi_infty } => {
                validate_finite_primes(pi_f)?;
                let all: Vec<u64> = pi_f.iter().map(|f| f.q).chain(pi_infty.iter().copied()).collect();
                require_distinct(&all)?;
                if pi_infty.is_empty() {
                    return Err(Error::invalid("heis-stable needs a non-empty infinite prime set"));
                }
                Ok(())
            }
            FamilyDescriptor::HeisenbergWild { prefix, n, r, pi_infty } => {
                validate_finite_primes(prefix)?;
                validate_finite_primes(&[FinitePrime { q: 2, n: *n, r: *r }])
                    .map_err(|_| Error::invalid(format!("default exponents need 1 <= r <= n, got n = {n}, r = {r}")))?;
                let all: Vec<u64> = prefix.iter().map(|f| f.q).chain(pi_infty.iter().copied()).collect();
                require_distinct(&all)
            }
            FamilyDescriptor::ToyModel { p, n, k } => {
                require_prime(*p)?;
                if *n < 1 || k >= n {
                    return Err(Error::invalid(format!("toy model needs n >= 1 and 0 <= k < n, got n = {n}, k = {k}")));
                }
                Ok(())
            }
        }
    }

    /// Levels the family defines, `None` when unbounded.
    pub fn depth_limit(&self) -> Option<usize> {
        match self {
            FamilyDescriptor::ToralDiagonal(t) => t.depth_limit(),
            FamilyDescriptor::ToralProduct { factors } => {
                factors.iter().map(ToralParams::depth_limit).try_fold(0usize, |acc, d| d.map(|d| acc.max(d)))
            }
            FamilyDescriptor::ToyModel { .. } => Some(1),
            _ => None,
        }
    }

    /// The `i`-th prime (from 1) of the wild family's finite spectrum.
    pub fn wild_prime(&self, i: usize) -> Option<FinitePrime> {
        let FamilyDescriptor::HeisenbergWild { prefix, n, r, pi_infty } = self else {
            return None;
        };
        if i == 0 {
            return None;
        }
        if i <= prefix.len() {
            return Some(prefix[i - 1]);
        }
        let mut q = prefix.iter().map(|f| f.q).max().unwrap_or(1);
        let mut idx = prefix.len();
        loop {
            q = next_prime(q + 1);
            if !pi_infty.contains(&q) {
                idx += 1;
                if idx == i {
                    return Some(FinitePrime { q, n: *n, r: *r });
                }
            }
        }
    }

    /// `(M_ℓ, N_ℓ)` for the Heisenberg families built from finite primes.
    fn heis_moduli(&self, level: usize) -> Result<(i128, i128)> {
        let finite: Vec<FinitePrime> = match self {
            FamilyDescriptor::HeisenbergStable { pi_f, .. } => pi_f.clone(),
            FamilyDescriptor::HeisenbergWild { .. } => (1..=level).filter_map(|i| self.wild_prime(i)).collect(),
            _ => unreachable!("only called for heis-stable and heis-wild"),
        };
        let pi_infty = match self {
            FamilyDescriptor::HeisenbergStable { pi_infty, .. } | FamilyDescriptor::HeisenbergWild { pi_infty, .. } => pi_infty,
            _ => unreachable!(),
        };
        let grow = growing_part(pi_infty, level)?;
        let (mut a, mut b) = (grow, grow);
        for f in finite {
            a = checked_mul(a, checked_pow(f.q, f.r as u64)?)?;
            b = checked_mul(b, checked_pow(f.q, f.n as u64)?)?;
        }
        Ok((a, b))
    }

    /// `Γ_ℓ` for `ℓ >= 1`.
    pub fn level_subgroup(&self, level: usize) -> Result<SubgroupDescriptor> {
        if level == 0 {
            return SubgroupDescriptor::whole(&self.group());
        }
        if let Some(d) = self.depth_limit() {
            if level > d {
                return Err(Error::invalid(format!("{} defines only {d} levels", self.name())));
            }
        }
        match self {
            FamilyDescriptor::ToralDiagonal(t) => SubgroupDescriptor::abelian_diagonal(&[t.modulus(level)?]),
            FamilyDescriptor::ToralProduct { factors } => {
                let diag = factors.iter().map(|f| f.modulus(level)).collect::<Result<Vec<_>>>()?;
                SubgroupDescriptor::abelian_diagonal(&diag)
            }
            FamilyDescriptor::HeisenbergSelfEmbed { p } => {
                let pl = checked_pow(*p, level as u64)?;
                SubgroupDescriptor::heisenberg(pl, pl, checked_mul(pl, pl)?)
            }
            FamilyDescriptor::HeisenbergStable { .. } | FamilyDescriptor::HeisenbergWild { .. } => {
                let (m, n) = self.heis_moduli(level)?;
                SubgroupDescriptor::heisenberg(m, n, n)
            }
            FamilyDescriptor::ToyModel { p, n, k } => {
                let pn = checked_pow(*p, *n as u64)?;
                SubgroupDescriptor::heisenberg(checked_pow(*p, *k as u64)?, pn, pn)
            }
        }
    }

    /// Symbolic `(Π[G], Π[D], Π[G:D])`.
    pub fn predicted(&self) -> Result<Option<PredictedOrders>> {
        let fin = |q: u64, e: u64| (q, Exponent::Finite(e));
        Ok(match self {
            FamilyDescriptor::ToralDiagonal(t) => t
                .predicted_group()?
                .map(|g| PredictedOrders { relative: g.clone(), group: g, discriminant: SteinitzNumber::one() }),
            FamilyDescriptor::ToralProduct { factors } => {
                let mut acc = Some(SteinitzNumber::one());
                for f in factors {
                    acc = match (acc, f.predicted_group()?) {
                        (Some(a), Some(g)) => Some(a.mul(&g)?),
                        _ => None,
                    };
                }
                acc.map(|g| PredictedOrders { relative: g.clone(), group: g, discriminant: SteinitzNumber::one() })
            }
            FamilyDescriptor::HeisenbergSelfEmbed { p } => {
                let g = SteinitzNumber::prime_power(*p, Exponent::Infinity)?;
                Some(PredictedOrders { relative: g.clone(), group: g, discriminant: SteinitzNumber::one() })
            }
            FamilyDescriptor::HeisenbergStable { pi_f, pi_infty } => {
                let inf = infinite_part(pi_infty)?;
                let g = SteinitzNumber::from_pairs(pi_f.iter().map(|f| fin(f.q, 3 * f.n as u64)))?.mul(&inf)?;
                let rel = SteinitzNumber::from_pairs(pi_f.iter().map(|f| fin(f.q, (2 * f.n + f.r) as u64)))?.mul(&inf)?;
                let d = SteinitzNumber::from_pairs(pi_f.iter().map(|f| fin(f.q, (f.n - f.r) as u64)))?;
                Some(PredictedOrders { group: g, discriminant: d, relative: rel })
            }
            FamilyDescriptor::HeisenbergWild { prefix, n, r, pi_infty } => {
                let start = prefix.iter().map(|f| f.q).max().unwrap_or(1) + 1;
                let stream = PrimeStream::from(start);
                let excluded: Vec<u64> = pi_infty.iter().copied().filter(|&p| p >= start).collect();
                let with_tail = |explicit: SteinitzNumber, e: u64| -> Result<SteinitzNumber> {
                    explicit.with_tail(TailRule::constant(stream, Exponent::Finite(e)).with_exclusions(excluded.clone()))
                };
                let (n, r) = (*n as u64, *r as u64);
                let pairs = |f: &dyn Fn(&FinitePrime) -> u64| -> Result<SteinitzNumber> {
                    SteinitzNumber::from_pairs(
                        prefix.iter().map(|x| fin(x.q, f(x))).chain(pi_infty.iter().map(|&p| (p, Exponent::Infinity))),
                    )
                };
                let g = with_tail(pairs(&|x| 3 * x.n as u64)?, 3 * n)?;
                let rel = with_tail(pairs(&|x| (2 * x.n + x.r) as u64)?, 2 * n + r)?;
                let d_explicit = SteinitzNumber::from_pairs(prefix.iter().map(|x| fin(x.q, (x.n - x.r) as u64)))?;
                let d = with_tail(d_explicit, n - r)?;
                Some(PredictedOrders { group: g, discriminant: d, relative: rel })
            }
            FamilyDescriptor::ToyModel { p, n, k } => {
                let (n, k) = (*n as u64, *k as u64);
                Some(PredictedOrders {
                    group: SteinitzNumber::from_pairs([fin(*p, 3 * n)])?,
                    discriminant: SteinitzNumber::from_pairs([fin(*p, n - k)])?,
                    relative: SteinitzNumber::from_pairs([fin(*p, 2 * n + k)])?,
                })
            }
        })
    }

    pub fn citation(&self) -> &'static str {
        match self {
            FamilyDescriptor::ToralDiagonal(_) | FamilyDescriptor::ToralProduct { .. } => {
                "diagonal toral chain: the group is abelian, so every core is the level itself and the discriminant is trivial"
            }
            FamilyDescriptor::HeisenbergSelfEmbed { .. } => {
                "iterated self-embedding (a,b,c) -> (pa,pb,p^2 c): level 2l lies in the core of level l, so the discriminant is trivial while k_l = p^(2l)"
            }
            FamilyDescriptor::HeisenbergStable { .. } => {
                "finite product of toy models over pi_f times p-adic factors over pi_infty: finite discriminant spectrum, hence stable"
            }
            FamilyDescriptor::HeisenbergWild { .. } => {
                "infinite product of toy models: each new prime's factor lies in the kernel of a restriction map, so the action is wild"
            }
            FamilyDescriptor::ToyModel { .. } => {
                "finite toy model: isotropy H_(p,n,k) of the basepoint in G_(p,n) = H(Z/p^n) has trivial core"
            }
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("family descriptors serialize")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let f: FamilyDescriptor =
            serde_json::from_value(v.clone()).map_err(|e| Error::invalid(format!("bad family rule: {e}")))?;
        f.validate()?;
        Ok(f)
    }
}

/// Chain of the family truncated at `max_depth`, with its predicted orders.
pub fn build_chain(f: &FamilyDescriptor, max_depth: usize) -> Result<ChainSpec> {
    f.validate()?;
    let mut spec = ChainSpec::new(f.group(), LevelRule::Family(f.clone()), max_depth)?;
    spec.predicted = f.predicted()?;
    spec.citation = Some(f.citation().to_string());
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedClassification {
    pub stable: Truth,
    pub topologically_free: Truth,
    pub discriminant_trivial: Truth,
    pub citation: String,
}

/// Classification asserted for the family, used as ground truth in tests.
pub fn expected_classification(f: &FamilyDescriptor) -> ExpectedClassification {
    use Truth::*;
    let (stable, topologically_free, discriminant_trivial, citation) = match f {
        FamilyDescriptor::ToralDiagonal(_) | FamilyDescriptor::ToralProduct { .. } => {
            (True, True, True, "abelian translation action: free, with trivial discriminant")
        }
        FamilyDescriptor::HeisenbergSelfEmbed { .. } => {
            (True, Unknown, True, "self-embedding chains have trivial discriminant and yield stable actions")
        }
        FamilyDescriptor::HeisenbergStable { .. } => {
            (True, Unknown, False, "finite discriminant prime spectrum forces stability")
        }
        FamilyDescriptor::HeisenbergWild { prefix, n, r, pi_infty } => {
            if r == n {
                // only the prefix contributes to the discriminant
                let trivial = prefix.iter().all(|f| f.r == f.n);
                return ExpectedClassification {
                    stable: True,
                    topologically_free: Unknown,
                    discriminant_trivial: trivial.into(),
                    citation: "with r = n beyond a finite prefix the discriminant has finite prime spectrum, which forces stability".into(),
                };
            }
            let free = pi_infty.is_empty() && *n == 2 && *r == 1 && prefix.iter().all(|f| f.n == 2 && f.r == 1);
            (
                False,
                if free { True } else { Unknown },
                False,
                "restriction maps have non-trivial kernels at every level, so the action is wild; with n = 2, r = 1 and no infinite primes the Heisenberg action is topologically free since the group is torsion-free",
            )
        }
        FamilyDescriptor::ToyModel { .. } => (
            Unknown,
            False,
            False,
            "finite action: non-identity elements of the isotropy group fix the multiples of z",
        ),
    };
    ExpectedClassification { stable, topologically_free, discriminant_trivial, citation: citation.to_string() }
}

/// Entry of the family catalogue shown by the command-line front end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyInfo {
    pub name: String,
    pub group: String,
    pub parameters: String,
    pub supported: bool,
    pub summary: String,
}

pub fn catalog() -> Vec<FamilyInfo> {
    let row = |name: &str, group: &str, parameters: &str, supported: bool, summary: &str| FamilyInfo {
        name: name.into(),
        group: group.into(),
        parameters: parameters.into(),
        supported,
        summary: summary.into(),
    };
    vec![
        row("toral-diagonal", "Z", "--pi-f q:n,... --pi-infty p,...", true, "diagonal odometer with prescribed spectrum"),
        row("toral-product", "Z^m", "--params JSON", true, "product of diagonal odometers"),
        row("heis-selfembed", "Heisenberg", "--p", true, "iterated self-embedding, trivial discriminant"),
        row("heis-stable", "Heisenberg", "--pi-f q:n:r,... --pi-infty p,...", true, "stable action with finite discriminant"),
        row("heis-wild", "Heisenberg", "--primes q,... --n --r [--pi-infty]", true, "wild action with infinite discriminant"),
        row("toy-model", "Heisenberg", "--p --n --k", true, "finite action of H(Z/p^n)"),
        row("permutation-extension", "Z^k semidirect C_k", "-", false, "not computed; see the families module docs"),
    ]
}
