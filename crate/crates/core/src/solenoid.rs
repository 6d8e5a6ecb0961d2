//! Covering-degree presentations of solenoids and their Steinitz orders.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::error::{checked_mul, Error, Result};
use crate::finite_nilpotent::index;
use crate::supernatural::primes::factorize;
use crate::supernatural::{Exponent, PrimeStream, SteinitzNumber, TailRule};
use crate::truth::Truth;

/// How the degree sequence continues after the explicit prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeTail {
    /// The block repeats forever.
    Periodic(Vec<u64>),
    /// One degree `p^exponent` for each prime `p` of the stream, in order.
    Primes {
        #[serde(default = "default_start")]
        start: u64,
        #[serde(default = "default_modulus")]
        modulus: u64,
        #[serde(default)]
        residue: u64,
        #[serde(default = "default_exponent")]
        exponent: u32,
    },
}

fn default_start() -> u64 {
    2
}
fn default_modulus() -> u64 {
    1
}
fn default_exponent() -> u32 {
    1
}
fn default_dim() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub degrees: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<DegreeTail>,
    #[serde(default = "default_dim")]
    pub dim: u32,
}

impl Presentation {
    pub fn new(degrees: Vec<u64>, tail: Option<DegreeTail>, dim: u32) -> Result<Self> {
        let p = Presentation { degrees, tail, dim };
        p.validate()?;
        Ok(p)
    }

    pub fn periodic(block: Vec<u64>) -> Result<Self> {
        Self::new(Vec::new(), Some(DegreeTail::Periodic(block)), 1)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.degrees.iter().find(|&&d| d < 2) {
            return Err(Error::invalid(format!("covering degree {d} is below 2")));
        }
        match &self.tail {
            None if self.degrees.is_empty() => Err(Error::invalid("presentation has no degrees")),
            Some(DegreeTail::Periodic(block)) => {
                if block.is_empty() {
                    return Err(Error::invalid("periodic tail needs a non-empty block"));
                }
                match block.iter().find(|&&d| d < 2) {
                    Some(d) => Err(Error::invalid(format!("covering degree {d} is below 2"))),
                    None => Ok(()),
                }
            }
            Some(DegreeTail::Primes { start, modulus, residue, exponent }) => {
                if *exponent == 0 {
                    return Err(Error::invalid("prime tail exponent must be at least 1"));
                }
                PrimeStream::new(*start, *modulus, *residue).map(|_| ())
            }
            None => Ok(()),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: Presentation = serde_json::from_str(s).map_err(|e| Error::invalid(format!("bad presentation: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    /// Number of levels, `None` when the sequence is infinite.
    pub fn len(&self) -> Option<usize> {
        self.tail.is_none().then_some(self.degrees.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Degree of the `level`-th covering, 1-based.
    pub fn degree(&self, level: usize) -> Result<Option<u64>> {
        if level == 0 {
            return Err(Error::invalid("levels start at 1"));
        }
        if let Some(&d) = self.degrees.get(level - 1) {
            return Ok(Some(d));
        }
        let i = level - 1 - self.degrees.len();
        match &self.tail {
            None => Ok(None),
            Some(DegreeTail::Periodic(block)) => Ok(Some(block[i % block.len()])),
            Some(DegreeTail::Primes { start, modulus, residue, exponent }) => {
                let p = PrimeStream::new(*start, *modulus, *residue)?.iter().nth(i).expect("streams are infinite");
                p.checked_pow(*exponent).map(Some).ok_or_else(|| Error::Overflow(format!("{p}^{exponent}")))
            }
        }
    }

    /// `m₁ m₂ ⋯ m_ℓ`.
    pub fn cumulative(&self, level: usize) -> Result<u128> {
        (1..=level).try_fold(1u128, |acc, l| {
            let d = self.degree(l)?.ok_or_else(|| Error::invalid(format!("presentation has fewer than {level} degrees")))?;
            checked_mul(acc, d as u128, "degree product")
        })
    }

    /// Presentation with the first `count` coverings composed away.
    pub fn drop_first(&self, count: usize) -> Result<Self> {
        let kept = count.min(self.degrees.len());
        let skip_tail = count - kept;
        let degrees = self.degrees[kept..].to_vec();
        let tail = match &self.tail {
            None if skip_tail > 0 || degrees.is_empty() => {
                return Err(Error::invalid(format!("cannot drop {count} of {} degrees", self.degrees.len())))
            }
            None => None,
            Some(DegreeTail::Periodic(block)) => {
                let s = skip_tail % block.len();
                Some(DegreeTail::Periodic(block[s..].iter().chain(&block[..s]).copied().collect()))
            }
            Some(DegreeTail::Primes { start, modulus, residue, exponent }) => {
                let next = PrimeStream::new(*start, *modulus, *residue)?.iter().nth(skip_tail).expect("streams are infinite");
                Some(DegreeTail::Primes { start: next, modulus: *modulus, residue: *residue, exponent: *exponent })
            }
        };
        Presentation::new(degrees, tail, self.dim)
    }
}

fn exponents_of(degrees: &[u64]) -> BTreeMap<u64, u64> {
    let mut out = BTreeMap::new();
    for &d in degrees {
        for (p, e) in factorize(d as u128) {
            *out.entry(p).or_insert(0) += e;
        }
    }
    out
}

/// `LCM{m₁ ⋯ m_ℓ}`: the cumulative product, with the tail carried
/// symbolically.
pub fn presentation_order(p: &Presentation) -> Result<SteinitzNumber> {
    p.validate()?;
    let prefix = exponents_of(&p.degrees);
    match &p.tail {
        None => SteinitzNumber::from_pairs(prefix.into_iter().map(|(q, e)| (q, Exponent::Finite(e)))),
        Some(DegreeTail::Periodic(block)) => {
            let mut pairs: BTreeMap<u64, Exponent> = prefix.into_iter().map(|(q, e)| (q, Exponent::Finite(e))).collect();
            for q in exponents_of(block).into_keys() {
                pairs.insert(q, Exponent::Infinity);
            }
            SteinitzNumber::from_pairs(pairs)
        }
        Some(DegreeTail::Primes { start, modulus, residue, exponent }) => {
            let stream = PrimeStream::new(*start, *modulus, *residue)?;
            let e = *exponent as u64;
            let pairs = prefix.iter().map(|(&q, &x)| (q, Exponent::Finite(if stream.contains(q) { x + e } else { x })));
            let base = SteinitzNumber::from_pairs(pairs)?;
            let tail = TailRule::constant(stream, Exponent::Finite(e)).with_exclusions(prefix.keys().copied());
            base.with_tail(tail)
        }
    }
}

/// Two 1-dimensional solenoids are homeomorphic exactly when their
/// presentation orders are asymptotically equivalent.
pub fn solenoids_homeomorphic_1d(a: &Presentation, b: &Presentation) -> Result<Truth> {
    for p in [a, b] {
        if p.dim != 1 {
            return Err(Error::Not1Dimensional(p.dim));
        }
    }
    Ok(presentation_order(a)?.asymptotically_equivalent(&presentation_order(b)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolenoidComparison {
    pub order_a: SteinitzNumber,
    pub order_b: SteinitzNumber,
    pub asymptotically_equivalent: Truth,
    /// Only decided in dimension 1.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub homeomorphic: Option<Truth>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Order comparison in any dimension; the homeomorphism verdict is given only
/// when both presentations are 1-dimensional.
pub fn compare_presentations(a: &Presentation, b: &Presentation) -> Result<SolenoidComparison> {
    let (order_a, order_b) = (presentation_order(a)?, presentation_order(b)?);
    let equivalent = order_a.asymptotically_equivalent(&order_b);
    let (homeomorphic, note) = if a.dim == 1 && b.dim == 1 {
        (Some(solenoids_homeomorphic_1d(a, b)?), None)
    } else {
        (None, Some(format!("dimensions {} and {}: equivalent orders are necessary for homeomorphism but not sufficient, so no decision is made", a.dim, b.dim)))
    };
    Ok(SolenoidComparison { order_a, order_b, asymptotically_equivalent: equivalent, homeomorphic, note })
}

impl SolenoidComparison {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "order A: {}\norder B: {}\nasymptotically equivalent: {}",
            self.order_a, self.order_b, self.asymptotically_equivalent
        );
        match (&self.homeomorphic, &self.note) {
            (Some(h), _) => out.push_str(&format!("; homeomorphic (1-d): {h}\n")),
            (None, Some(n)) => out.push_str(&format!("\nhomeomorphic: not decided ({n})\n")),
            (None, None) => out.push('\n'),
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonodromyCheck {
    pub levels_checked: usize,
    /// Chain indices `m_ℓ`, equal to the cumulative degrees.
    pub indices: Vec<u128>,
    pub truncated_order: SteinitzNumber,
    /// Full presentation order against the chain's predicted relative order.
    pub prediction_matches: Truth,
}

/// Check the asserted correspondence `[Γ₀:Γ_ℓ] = m₁ ⋯ m_ℓ` level by level,
/// and the truncated relative Steinitz order.
pub fn presentation_to_chain(p: &Presentation, chain: &ChainSpec, limit: u128) -> Result<MonodromyCheck> {
    p.validate()?;
    chain.validate()?;
    let depth = p.len().map_or(chain.max_depth, |n| n.min(chain.max_depth));
    let mut indices = Vec::with_capacity(depth);
    let mut relative = SteinitzNumber::one();
    for level in 1..=depth {
        let m = index(&chain.group, &chain.subgroup(level, limit)?)?;
        let d = p.cumulative(level)?;
        if m != d {
            return Err(Error::MismatchAtLevel { level, detail: format!("degree product {d}, chain index {m}") });
        }
        relative = relative.lcm(&SteinitzNumber::from_u128(m)?)?;
        indices.push(m);
    }
    let truncated_order = SteinitzNumber::from_u128(p.cumulative(depth)?)?;
    if !truncated_order.same_as(&relative).is_true() {
        return Err(Error::MismatchAtLevel { level: depth, detail: format!("order {truncated_order} against {relative}") });
    }
    let prediction_matches = match (&chain.predicted, p.len()) {
        (Some(pred), None) => presentation_order(p)?.same_as(&pred.relative),
        _ => Truth::Unknown,
    };
    Ok(MonodromyCheck { levels_checked: depth, indices, truncated_order, prediction_matches })
}

#[cfg(test)]
mod solenoid_tests {
    use super::*;

    fn n(s: &str) -> SteinitzNumber {
        s.parse().unwrap()
    }

    #[test]
    fn orders() {
        assert_eq!(presentation_order(&Presentation::periodic(vec![2]).unwrap()).unwrap(), n("2^inf"));
        assert_eq!(presentation_order(&Presentation::new(vec![2, 3, 4], None, 1).unwrap()).unwrap(), n("2^3 · 3"));
        assert_eq!(presentation_order(&Presentation::new(vec![6, 10], None, 1).unwrap()).unwrap(), n("2^2 · 3 · 5"));
        assert!(Presentation::new(vec![2, 1], None, 1).is_err());
    }

    #[test]
    fn prime_tail_overlapping_prefix() {
        let tail = DegreeTail::Primes { start: 2, modulus: 1, residue: 0, exponent: 1 };
        let p = Presentation::new(vec![4, 3], Some(tail), 1).unwrap();
        let order = presentation_order(&p).unwrap();
        assert_eq!(order.exponent(2), Exponent::Finite(3));
        assert_eq!(order.exponent(3), Exponent::Finite(2));
        assert_eq!(order.exponent(101), Exponent::Finite(1));
    }

    #[test]
    fn degrees_and_drop() {
        let p = Presentation::new(vec![6], Some(DegreeTail::Periodic(vec![2, 3])), 1).unwrap();
        assert_eq!(p.cumulative(4).unwrap(), 6 * 2 * 3 * 2);
        let q = p.drop_first(2).unwrap();
        assert_eq!(q.degree(1).unwrap(), Some(3));
        let primes = Presentation::new(vec![], Some(DegreeTail::Primes { start: 2, modulus: 1, residue: 0, exponent: 1 }), 1).unwrap();
        assert_eq!(primes.drop_first(1).unwrap().degree(1).unwrap(), Some(3));
    }

    #[test]
    fn higher_dimension_refused() {
        let a = Presentation::new(vec![2], Some(DegreeTail::Periodic(vec![2])), 2).unwrap();
        assert_eq!(solenoids_homeomorphic_1d(&a, &a), Err(Error::Not1Dimensional(2)));
        let c = compare_presentations(&a, &a).unwrap();
        assert_eq!(c.homeomorphic, None);
        assert_eq!(c.asymptotically_equivalent, Truth::True);
    }
}
