//! Steinitz (supernatural) numbers: formal products `prod p^n(p)` with
//! exponents in `N ∪ {∞}`, optionally continued by symbolic tail rules.

mod format;
pub mod primes;
mod tail;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use tail::{PrimeStream, TailRule};

use crate::error::{Error, Result};
use crate::truth::Truth;
use primes::{factorize, gcd, is_prime, lcm};

/// Number of stream primes inspected when validating tail disjointness.
pub const TAIL_VALIDATION_PRIMES: usize = 64;

/// Exponent in `N ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Exponent {
    Finite(u64),
    Infinity,
}

impl Exponent {
    pub const ZERO: Exponent = Exponent::Finite(0);

    pub fn is_zero(self) -> bool {
        self == Exponent::ZERO
    }

    pub fn is_infinite(self) -> bool {
        self == Exponent::Infinity
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Exponent::Finite(n) => Some(n),
            Exponent::Infinity => None,
        }
    }

    pub fn max(self, other: Exponent) -> Exponent {
        std::cmp::max(self, other)
    }
}

impl std::ops::Add for Exponent {
    type Output = Exponent;

    fn add(self, other: Exponent) -> Exponent {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => Exponent::Finite(a.checked_add(b).expect("exponent overflow")),
            _ => Exponent::Infinity,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(n) => write!(f, "{n}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

/// A supernatural number. Explicit entries never overlap the support of a tail.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SteinitzNumber {
    explicit: BTreeMap<u64, Exponent>,
    tails: Vec<TailRule>,
}

/// A set of primes, stored as the support of a 0/1-valued Steinitz number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrimeSet(SteinitzNumber);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSpectrumReport {
    pub pi: PrimeSet,
    pub pi_f: PrimeSet,
    pub pi_infty: PrimeSet,
    pub pi_f_is_infinite: Truth,
}

/// Where a compared pair of exponents lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Prime(u64),
    /// Infinitely many primes share this pair of exponents.
    Infinite,
}

impl SteinitzNumber {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_u128(n: u128) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("0 is not a Steinitz number"));
        }
        Ok(SteinitzNumber {
            explicit: factorize(n).into_iter().map(|(p, e)| (p, Exponent::Finite(e))).collect(),
            tails: Vec::new(),
        })
    }

    pub fn prime_power(p: u64, e: Exponent) -> Result<Self> {
        Self::from_pairs([(p, e)])
    }

    /// Build from distinct `(prime, exponent)` pairs; zero exponents are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, Exponent)>) -> Result<Self> {
        let mut explicit = BTreeMap::new();
        for (p, e) in pairs {
            if !is_prime(p) {
                return Err(Error::invalid(format!("{p} is not prime")));
            }
            if explicit.insert(p, e).is_some() {
                return Err(Error::invalid(format!("prime {p} listed twice")));
            }
        }
        explicit.retain(|_, e| !e.is_zero());
        Ok(SteinitzNumber { explicit, tails: Vec::new() })
    }

    /// Attach a tail rule. Its support must avoid the explicit primes and any
    /// tail already present; streams must be equal-and-mergeable or disjoint.
    pub fn with_tail(mut self, rule: TailRule) -> Result<Self> {
        for &p in self.explicit.keys() {
            if rule.covers(p) {
                return Err(Error::invalid(format!("tail covers explicit prime {p}")));
            }
        }
        let prefix = rule.support_prefix(TAIL_VALIDATION_PRIMES);
        if let Some(p) = prefix.iter().find(|p| self.explicit.contains_key(p)) {
            return Err(Error::invalid(format!("tail covers explicit prime {p}")));
        }
        for t in &self.tails {
            if !t.stream().disjoint(rule.stream()) {
                return Err(Error::IncompatibleTails(format!(
                    "tail streams {:?} and {:?} overlap",
                    t.stream(),
                    rule.stream()
                )));
            }
        }
        if !rule.is_zero() {
            self.tails.push(rule);
            self.tails.sort_by(|a, b| a.stream().cmp(b.stream()));
        }
        Ok(self)
    }

    pub fn explicit(&self) -> &BTreeMap<u64, Exponent> {
        &self.explicit
    }

    pub fn tails(&self) -> &[TailRule] {
        &self.tails
    }

    pub fn has_tail(&self) -> bool {
        !self.tails.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.explicit.is_empty() && self.tails.is_empty()
    }

    pub fn exponent(&self, p: u64) -> Exponent {
        if let Some(e) = self.explicit.get(&p) {
            return *e;
        }
        self.tails.iter().map(|t| t.exponent_at(p)).find(|e| !e.is_zero()).unwrap_or(Exponent::ZERO)
    }

    /// The ordinary integer, when the number is finite.
    pub fn to_u128(&self) -> Option<u128> {
        if self.has_tail() {
            return None;
        }
        let mut acc: u128 = 1;
        for (&p, e) in &self.explicit {
            let e = u32::try_from(e.finite()?).ok()?;
            acc = acc.checked_mul((p as u128).checked_pow(e)?)?;
        }
        Some(acc)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, std::ops::Add::add)
    }

    pub fn lcm(&self, other: &Self) -> Result<Self> {
        self.combine(other, Exponent::max)
    }

    fn check_tails_compatible(&self, other: &Self) -> Result<()> {
        for a in &self.tails {
            for b in &other.tails {
                if a.stream() != b.stream() && !a.stream().disjoint(b.stream()) {
                    return Err(Error::IncompatibleTails(format!(
                        "streams {:?} and {:?} are neither equal nor disjoint",
                        a.stream(),
                        b.stream()
                    )));
                }
            }
        }
        Ok(())
    }

    fn combine(&self, other: &Self, op: impl Fn(Exponent, Exponent) -> Exponent + Copy) -> Result<Self> {
        self.check_tails_compatible(other)?;
        let mut tails: Vec<TailRule> = Vec::new();
        for a in &self.tails {
            match other.tails.iter().find(|b| b.stream() == a.stream()) {
                Some(b) => tails.push(a.zip(b, op)),
                None => tails.push(a.clone()),
            }
        }
        for b in &other.tails {
            if !self.tails.iter().any(|a| a.stream() == b.stream()) {
                tails.push(b.clone());
            }
        }
        let mut keys: BTreeSet<u64> = self.explicit.keys().chain(other.explicit.keys()).copied().collect();
        for t in self.tails.iter().chain(other.tails.iter()) {
            keys.extend(t.exclude().iter().copied());
        }
        let mut explicit = BTreeMap::new();
        for p in keys {
            let e = op(self.exponent(p), other.exponent(p));
            if !e.is_zero() {
                explicit.insert(p, e);
            }
        }
        Ok(Self::normalized(explicit, tails))
    }

    fn normalized(explicit: BTreeMap<u64, Exponent>, tails: Vec<TailRule>) -> Self {
        let keys: Vec<u64> = explicit.keys().copied().collect();
        let mut tails: Vec<TailRule> = tails
            .into_iter()
            .map(|t| t.with_exclusions(keys.iter().copied()))
            .filter(|t| !t.is_zero())
            .collect();
        tails.sort_by(|a, b| a.stream().cmp(b.stream()));
        SteinitzNumber { explicit, tails }
    }

    /// Pairs `(self(p), other(p))` covering every prime: single primes below a
    /// threshold, then classes holding infinitely many primes each. `None` when
    /// the tails are too unlike to align.
    fn regions(&self, other: &Self) -> Option<Vec<(Exponent, Exponent, Region)>> {
        let all_tails: Vec<&TailRule> = self.tails.iter().chain(other.tails.iter()).collect();
        let all_constant = all_tails.iter().all(|t| t.is_constant());
        let modulus = all_tails.iter().fold(1u128, |m, t| lcm(m, t.stream().modulus() as u128));
        let mut threshold: u64 = 2;
        for (&p, _) in self.explicit.iter().chain(other.explicit.iter()) {
            threshold = threshold.max(p + 1);
        }
        for t in &all_tails {
            threshold = threshold.max(t.stream().start());
            if let Some(&p) = t.exclude().iter().next_back() {
                threshold = threshold.max(p + 1);
            }
        }
        threshold = threshold.max(u64::try_from(modulus).ok()? + 1);

        let mut out = Vec::new();
        let mut small: BTreeSet<u64> = self.explicit.keys().chain(other.explicit.keys()).copied().collect();
        for t in &all_tails {
            small.extend(t.stream().iter().take_while(|&p| p < threshold));
        }
        for p in small {
            out.push((self.exponent(p), other.exponent(p), Region::Prime(p)));
        }
        if all_tails.is_empty() {
            return Some(out);
        }
        if all_constant {
            let at = |n: &Self, r: u128| {
                n.tails
                    .iter()
                    .find(|t| r % t.stream().modulus() as u128 == t.stream().residue() as u128)
                    .map(|t| t.pattern()[0])
                    .unwrap_or(Exponent::ZERO)
            };
            for r in 0..modulus {
                if gcd(r, modulus) == 1 || modulus == 1 {
                    out.push((at(self, r), at(other, r), Region::Infinite));
                }
            }
            return Some(out);
        }
        // Indexed patterns: streams must coincide or be disjoint pairwise.
        for a in &self.tails {
            for b in &other.tails {
                if a.stream() != b.stream() && !a.stream().disjoint(b.stream()) {
                    return None;
                }
            }
        }
        for a in &self.tails {
            let pa = a.pattern();
            let pb = other
                .tails
                .iter()
                .find(|b| b.stream() == a.stream())
                .map(|b| b.pattern())
                .unwrap_or_else(|| vec![Exponent::ZERO]);
            let n = lcm(pa.len() as u128, pb.len() as u128) as usize;
            for i in 0..n {
                out.push((pa[i % pa.len()], pb[i % pb.len()], Region::Infinite));
            }
        }
        for b in &other.tails {
            if !self.tails.iter().any(|a| a.stream() == b.stream()) {
                for e in b.pattern() {
                    out.push((Exponent::ZERO, e, Region::Infinite));
                }
            }
        }
        Some(out)
    }

    /// `self | other`: every exponent of `self` is at most the one in `other`.
    pub fn divides(&self, other: &Self) -> Result<bool> {
        let regions = self.regions(other).ok_or_else(|| {
            Error::IncompatibleTails("tails cannot be aligned for a divisibility test".into())
        })?;
        Ok(regions.iter().all(|(a, b, _)| a <= b))
    }

    /// Semantic equality, deciding through tails where possible.
    pub fn same_as(&self, other: &Self) -> Truth {
        match self.regions(other) {
            Some(r) => r.iter().all(|(a, b, _)| a == b).into(),
            None => Truth::Unknown,
        }
    }

    /// Equivalence up to finite integer factors on either side.
    pub fn asymptotically_equivalent(&self, other: &Self) -> Truth {
        let Some(regions) = self.regions(other) else {
            return Truth::Unknown;
        };
        for (a, b, region) in regions {
            if a.is_infinite() != b.is_infinite() {
                return Truth::False;
            }
            if a != b && region == Region::Infinite {
                return Truth::False;
            }
        }
        Truth::True
    }

    pub fn spectra(&self) -> PrimeSpectrumReport {
        let indicator = |keep: &dyn Fn(Exponent) -> bool| {
            let explicit = self
                .explicit
                .iter()
                .filter(|(_, &e)| keep(e))
                .map(|(&p, _)| (p, Exponent::Finite(1)))
                .collect();
            let tails = self
                .tails
                .iter()
                .map(|t| t.map(|e| if keep(e) { Exponent::Finite(1) } else { Exponent::ZERO }))
                .collect();
            PrimeSet(Self::normalized(explicit, tails))
        };
        let pi = indicator(&|e: Exponent| !e.is_zero());
        let pi_f = indicator(&|e: Exponent| !e.is_zero() && !e.is_infinite());
        let pi_infty = indicator(&|e: Exponent| e.is_infinite());
        let pi_f_is_infinite = pi_f.0.has_tail().into();
        PrimeSpectrumReport { pi, pi_f, pi_infty, pi_f_is_infinite }
    }

    /// Exact quotient of finite numbers, `None` unless `other | self`.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if self.has_tail() || other.has_tail() {
            return None;
        }
        let mut explicit = self.explicit.clone();
        for (&p, &e) in &other.explicit {
            let have = explicit.get(&p).copied().unwrap_or(Exponent::ZERO);
            let rest = match (have, e) {
                (Exponent::Infinity, _) => Exponent::Infinity,
                (Exponent::Finite(a), Exponent::Finite(b)) if a >= b => Exponent::Finite(a - b),
                _ => return None,
            };
            if rest.is_zero() {
                explicit.remove(&p);
            } else {
                explicit.insert(p, rest);
            }
        }
        Some(SteinitzNumber { explicit, tails: Vec::new() })
    }
}

impl PrimeSet {
    pub fn empty() -> Self {
        PrimeSet(SteinitzNumber::one())
    }

    pub fn from_primes(ps: impl IntoIterator<Item = u64>) -> Result<Self> {
        let set: BTreeSet<u64> = ps.into_iter().collect();
        Ok(PrimeSet(SteinitzNumber::from_pairs(set.into_iter().map(|p| (p, Exponent::Finite(1))))?))
    }

    pub fn contains(&self, p: u64) -> bool {
        !self.0.exponent(p).is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.has_tail()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_one()
    }

    /// Explicitly listed primes (all of them when the set is finite).
    pub fn explicit_primes(&self) -> Vec<u64> {
        self.0.explicit.keys().copied().collect()
    }

    pub fn tails(&self) -> &[TailRule] {
        self.0.tails()
    }

    pub fn same_as(&self, other: &PrimeSet) -> Truth {
        self.0.same_as(&other.0)
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.explicit_primes().iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", ps.join(", "))?;
        for t in self.tails() {
            write!(f, " ∪ {}", format::render_tail_set(t))?;
        }
        Ok(())
    }
}

/// Steinitz number of the product of the first `truncation` factors.
pub fn steinitz_from_factor_sequence(factors: &[u64], truncation: usize) -> Result<SteinitzNumber> {
    if truncation == 0 {
        return Err(Error::invalid("truncation must be at least 1"));
    }
    if factors.len() < truncation {
        return Err(Error::invalid(format!(
            "truncation {truncation} exceeds the {} supplied factors",
            factors.len()
        )));
    }
    let mut acc = SteinitzNumber::one();
    for &f in &factors[..truncation] {
        if f < 2 {
            return Err(Error::invalid(format!("factor {f} is below 2")));
        }
        acc = acc.mul(&SteinitzNumber::from_u128(f as u128)?)?;
    }
    Ok(acc)
}
