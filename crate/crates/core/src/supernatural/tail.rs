use std::collections::BTreeSet;

use super::primes::{gcd, is_prime, lcm};
use super::Exponent;
use crate::error::{Error, Result};

/// Increasing stream of primes `p >= start` with `p = residue (mod modulus)`.
///
/// The residue class must be coprime to the modulus so the stream is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimeStream {
    start: u64,
    modulus: u64,
    residue: u64,
}

impl PrimeStream {
    pub fn new(start: u64, modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::invalid("prime stream modulus must be >= 1"));
        }
        let residue = residue % modulus;
        if gcd(residue as u128, modulus as u128) != 1 && modulus > 1 {
            return Err(Error::invalid(format!(
                "residue {residue} is not coprime to modulus {modulus}; stream would be finite"
            )));
        }
        Ok(PrimeStream { start: start.max(2), modulus, residue })
    }

    /// All primes `>= start`.
    pub fn from(start: u64) -> Self {
        PrimeStream { start: start.max(2), modulus: 1, residue: 0 }
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn contains(&self, p: u64) -> bool {
        p >= self.start && p % self.modulus == self.residue && is_prime(p)
    }

    /// Residue classes with no common integer cannot share a prime.
    pub fn disjoint(&self, other: &PrimeStream) -> bool {
        let g = gcd(self.modulus as u128, other.modulus as u128) as u64;
        self.residue % g != other.residue % g
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let s = *self;
        (s.start..).filter(move |&p| p % s.modulus == s.residue && is_prime(p))
    }

    /// Zero-based position of `p` in the stream.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        Some(self.iter().take_while(|&q| q < p).count())
    }
}

/// Rule generating exponents on the primes of a stream, minus a finite
/// exclusion set. Exclusions do not shift the stream indexing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TailRule {
    /// Every included prime gets the same exponent.
    ConstantExponent { stream: PrimeStream, exclude: BTreeSet<u64>, exponent: Exponent },
    /// The i-th prime of the stream gets `pattern[i % pattern.len()]`.
    IndexedExponent { stream: PrimeStream, exclude: BTreeSet<u64>, pattern: Vec<Exponent> },
}

impl TailRule {
    pub fn constant(stream: PrimeStream, exponent: Exponent) -> Self {
        TailRule::ConstantExponent { stream, exclude: BTreeSet::new(), exponent }
    }

    pub fn indexed(stream: PrimeStream, pattern: Vec<Exponent>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::invalid("indexed tail needs a non-empty pattern"));
        }
        Ok(Self::from_parts(stream, BTreeSet::new(), pattern))
    }

    pub fn with_exclusions(self, extra: impl IntoIterator<Item = u64>) -> Self {
        let stream = *self.stream();
        let mut exclude = self.exclude().clone();
        exclude.extend(extra.into_iter().filter(|&p| stream.contains(p)));
        Self::from_parts(stream, exclude, self.pattern())
    }

    /// Canonical constructor: reduces the pattern to its minimal period.
    pub(crate) fn from_parts(stream: PrimeStream, exclude: BTreeSet<u64>, pattern: Vec<Exponent>) -> Self {
        let exclude = exclude.into_iter().filter(|&p| stream.contains(p)).collect();
        let n = pattern.len();
        let period = (1..=n)
            .find(|&d| n.is_multiple_of(d) && (0..n).all(|i| pattern[i] == pattern[i % d]))
            .unwrap_or(n);
        if period == 1 {
            TailRule::ConstantExponent { stream, exclude, exponent: pattern[0] }
        } else {
            TailRule::IndexedExponent { stream, exclude, pattern: pattern[..period].to_vec() }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TailRule::ConstantExponent { .. } => "constant-exponent",
            TailRule::IndexedExponent { .. } => "indexed-exponent",
        }
    }

    pub fn stream(&self) -> &PrimeStream {
        match self {
            TailRule::ConstantExponent { stream, .. } | TailRule::IndexedExponent { stream, .. } => stream,
        }
    }

    pub fn exclude(&self) -> &BTreeSet<u64> {
        match self {
            TailRule::ConstantExponent { exclude, .. } | TailRule::IndexedExponent { exclude, .. } => exclude,
        }
    }

    pub fn pattern(&self) -> Vec<Exponent> {
        match self {
            TailRule::ConstantExponent { exponent, .. } => vec![*exponent],
            TailRule::IndexedExponent { pattern, .. } => pattern.clone(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TailRule::ConstantExponent { .. })
    }

    pub fn is_zero(&self) -> bool {
        self.pattern().iter().all(|e| e.is_zero())
    }

    /// Primes of the stream that actually carry an exponent.
    pub fn covers(&self, p: u64) -> bool {
        self.stream().contains(p) && !self.exclude().contains(&p)
    }

    pub fn exponent_at(&self, p: u64) -> Exponent {
        if !self.covers(p) {
            return Exponent::ZERO;
        }
        match self {
            TailRule::ConstantExponent { exponent, .. } => *exponent,
            TailRule::IndexedExponent { stream, pattern, .. } => {
                let i = stream.index_of(p).expect("covered prime lies in stream");
                pattern[i % pattern.len()]
            }
        }
    }

    /// Apply `f` to every exponent of the pattern.
    pub fn map(&self, f: impl Fn(Exponent) -> Exponent) -> Self {
        Self::from_parts(*self.stream(), self.exclude().clone(), self.pattern().into_iter().map(f).collect())
    }

    /// Pointwise combination of two rules over the same stream.
    pub(crate) fn zip(&self, other: &TailRule, f: impl Fn(Exponent, Exponent) -> Exponent) -> TailRule {
        debug_assert_eq!(self.stream(), other.stream());
        let (pa, pb) = (self.pattern(), other.pattern());
        let n = lcm(pa.len() as u128, pb.len() as u128) as usize;
        let pattern = (0..n).map(|i| f(pa[i % pa.len()], pb[i % pb.len()])).collect();
        let exclude = self.exclude().union(other.exclude()).copied().collect();
        Self::from_parts(*self.stream(), exclude, pattern)
    }

    /// First `count` primes the rule assigns a non-zero exponent to.
    pub fn support_prefix(&self, count: usize) -> Vec<u64> {
        let pattern = self.pattern();
        let excl = self.exclude().clone();
        if pattern.iter().all(|e| e.is_zero()) {
            return Vec::new();
        }
        self.stream()
            .iter()
            .enumerate()
            .filter(|(i, p)| !excl.contains(p) && !pattern[i % pattern.len()].is_zero())
            .map(|(_, p)| p)
            .take(count)
            .collect()
    }
}
