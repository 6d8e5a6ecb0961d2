use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::heisenberg::{HeisElem, HeisModuli};
use super::lattice::Lattice;
use crate::error::{Error, Result};

fn gcd(a: i128, b: i128) -> i128 {
    crate::supernatural::primes::gcd(a.unsigned_abs(), b.unsigned_abs()) as i128
}

fn lcm(a: i128, b: i128) -> i128 {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GroupDescriptor {
    FreeAbelian { rank: usize },
    Heisenberg,
}

impl GroupDescriptor {
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupDescriptor::FreeAbelian { rank: 0 } => Err(Error::invalid("rank must be at least 1")),
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupDescriptor::FreeAbelian { rank } => GroupElement::Vector(vec![0; *rank]),
            GroupDescriptor::Heisenberg => GroupElement::Heisenberg(HeisElem::IDENTITY),
        }
    }

    /// Standard generators: unit vectors, or `x, y, z`.
    pub fn generators(&self) -> Vec<GroupElement> {
        match self {
            GroupDescriptor::FreeAbelian { rank } => (0..*rank)
                .map(|i| GroupElement::Vector((0..*rank).map(|j| i128::from(i == j)).collect()))
                .collect(),
            GroupDescriptor::Heisenberg => [HeisElem::x(), HeisElem::y(), HeisElem::z()]
                .into_iter()
                .map(GroupElement::Heisenberg)
                .collect(),
        }
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        match (g, h) {
            (GroupElement::Heisenberg(a), GroupElement::Heisenberg(b)) => Ok(GroupElement::Heisenberg(a.mul(b))),
            (GroupElement::Vector(a), GroupElement::Vector(b)) if a.len() == b.len() => {
                Ok(GroupElement::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect()))
            }
            _ => Err(Error::invalid("elements belong to different groups")),
        }
    }

    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        match g {
            GroupElement::Heisenberg(a) => GroupElement::Heisenberg(a.inv()),
            GroupElement::Vector(v) => GroupElement::Vector(v.iter().map(|x| -x).collect()),
        }
    }
}

/// Element of `Z^r` or of the Heisenberg group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupElement {
    Heisenberg(HeisElem),
    Vector(Vec<i128>),
}

impl GroupElement {
    pub fn heis(&self) -> Option<&HeisElem> {
        match self {
            GroupElement::Heisenberg(h) => Some(h),
            GroupElement::Vector(_) => None,
        }
    }
}

/// `{(aM, bN, cP) | a, b, c ∈ Z}` with `P | M N` so the set is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParametric")]
pub struct Parametric {
    #[serde(rename = "M")]
    pub m: i128,
    #[serde(rename = "N")]
    pub n: i128,
    #[serde(rename = "P")]
    pub p: i128,
}

#[derive(Deserialize)]
struct RawParametric {
    #[serde(rename = "M")]
    m: i128,
    #[serde(rename = "N")]
    n: i128,
    #[serde(rename = "P")]
    p: i128,
}

impl TryFrom<RawParametric> for Parametric {
    type Error = Error;

    fn try_from(r: RawParametric) -> Result<Self> {
        Parametric::new(r.m, r.n, r.p)
    }
}

impl Parametric {
    pub fn new(m: i128, n: i128, p: i128) -> Result<Self> {
        if m < 1 || n < 1 || p < 1 {
            return Err(Error::invalid(format!("(M, N, P) = ({m}, {n}, {p}) must be positive")));
        }
        let overflow = || Error::Overflow(format!("index of the core of ({m}, {n}, {p})"));
        let mn = m.checked_mul(n).ok_or_else(overflow)?;
        if mn % p != 0 {
            return Err(Error::invalid(format!("P = {p} does not divide M·N = {mn}; the set is not a subgroup")));
        }
        // the core index bounds every index computed from these moduli
        let lcm_with_p = |x: i128| (x / gcd(x, p)).checked_mul(p).map(|v| v as u128);
        lcm_with_p(m)
            .zip(lcm_with_p(n))
            .and_then(|(a, b)| a.checked_mul(b))
            .and_then(|ab| ab.checked_mul(p as u128))
            .ok_or_else(overflow)?;
        Ok(Parametric { m, n, p })
    }

    pub fn contains(&self, g: &HeisElem) -> bool {
        g.a % self.m == 0 && g.b % self.n == 0 && g.c % self.p == 0
    }

    pub fn index(&self) -> u128 {
        self.m as u128 * self.n as u128 * self.p as u128
    }

    /// Closed-form normal core `(lcm(M,P), lcm(N,P), P)`.
    pub fn core(&self) -> Parametric {
        Parametric { m: lcm(self.m, self.p), n: lcm(self.n, self.p), p: self.p }
    }

    pub fn is_normal(&self) -> bool {
        self.m % self.p == 0 && self.n % self.p == 0
    }

    /// Moduli of the core, always a normal congruence subgroup inside `self`.
    pub fn core_moduli(&self) -> HeisModuli {
        let c = self.core();
        HeisModuli { ma: c.m, mb: c.n, mc: c.p }
    }

    pub fn is_subgroup_of(&self, outer: &Parametric) -> bool {
        self.m % outer.m == 0 && self.n % outer.n == 0 && self.p % outer.p == 0
    }

    pub fn generators(&self) -> [HeisElem; 3] {
        [HeisElem::new(self.m, 0, 0), HeisElem::new(0, self.n, 0), HeisElem::new(0, 0, self.p)]
    }

    /// Canonical representative of the left coset `g·H`.
    pub fn coset_rep(&self, g: &HeisElem) -> HeisElem {
        let a = g.a.rem_euclid(self.m);
        let b = g.b.rem_euclid(self.n);
        let c = (g.c - a * (g.b - b)).rem_euclid(self.p);
        HeisElem::new(a, b, c)
    }

    /// Canonical representatives of `self / inner` for a parametric `inner ⊆ self`.
    pub fn relative_coset_reps(&self, inner: &Parametric) -> impl Iterator<Item = HeisElem> {
        let (sa, sb, sc) = (inner.m / self.m, inner.n / self.n, inner.p / self.p);
        let outer = *self;
        (0..sa).flat_map(move |x| {
            (0..sb).flat_map(move |y| (0..sc).map(move |z| HeisElem::new(x * outer.m, y * outer.n, z * outer.p)))
        })
    }
}

/// Preimage in the Heisenberg group of a subgroup of the finite quotient by
/// `moduli`. Elements are stored reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinitePreimage {
    pub moduli: HeisModuli,
    pub elements: BTreeSet<HeisElem>,
}

impl FinitePreimage {
    /// Validates closure under the quotient law.
    pub fn new(moduli: HeisModuli, elements: impl IntoIterator<Item = HeisElem>) -> Result<Self> {
        let elements: BTreeSet<HeisElem> = elements.into_iter().map(|g| moduli.reduce(&g)).collect();
        if !elements.contains(&HeisElem::IDENTITY) {
            return Err(Error::invalid("subgroup must contain the identity"));
        }
        for g in &elements {
            for h in &elements {
                if !elements.contains(&moduli.mul(g, &moduli.inv(h))) {
                    return Err(Error::invalid("element set is not closed under the group law"));
                }
            }
        }
        Ok(FinitePreimage { moduli, elements })
    }

    pub fn contains(&self, g: &HeisElem) -> bool {
        self.elements.contains(&self.moduli.reduce(g))
    }

    pub fn index(&self) -> u128 {
        self.moduli.order() / self.elements.len() as u128
    }

    /// Re-express over finer moduli (a smaller kernel).
    pub fn lift_to(&self, fine: &HeisModuli) -> Result<FinitePreimage> {
        if !self.moduli.refines(fine) {
            return Err(Error::invalid("target moduli do not refine the subgroup's kernel"));
        }
        let (ka, kb, kc) = (fine.ma / self.moduli.ma, fine.mb / self.moduli.mb, fine.mc / self.moduli.mc);
        let mut out = BTreeSet::new();
        for g in &self.elements {
            for i in 0..ka {
                for j in 0..kb {
                    for k in 0..kc {
                        let lifted = HeisElem::new(g.a + i * self.moduli.ma, g.b + j * self.moduli.mb, g.c + k * self.moduli.mc);
                        out.insert(fine.reduce(&lifted));
                    }
                }
            }
        }
        Ok(FinitePreimage { moduli: *fine, elements: out })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SubgroupDescriptor {
    AbelianLattice(Lattice),
    HeisenbergParametric(Parametric),
    FinitePreimage(FinitePreimage),
}

impl SubgroupDescriptor {
    pub fn heisenberg(m: i128, n: i128, p: i128) -> Result<Self> {
        Ok(SubgroupDescriptor::HeisenbergParametric(Parametric::new(m, n, p)?))
    }

    pub fn abelian_diagonal(entries: &[i128]) -> Result<Self> {
        Ok(SubgroupDescriptor::AbelianLattice(Lattice::diagonal(entries)?))
    }

    pub fn whole(group: &GroupDescriptor) -> Result<Self> {
        match group {
            GroupDescriptor::FreeAbelian { rank } => Ok(SubgroupDescriptor::AbelianLattice(Lattice::full(*rank)?)),
            GroupDescriptor::Heisenberg => Self::heisenberg(1, 1, 1),
        }
    }

    pub fn check_group(&self, group: &GroupDescriptor) -> Result<()> {
        match (self, group) {
            (SubgroupDescriptor::AbelianLattice(l), GroupDescriptor::FreeAbelian { rank }) if l.rank() == *rank => Ok(()),
            (SubgroupDescriptor::HeisenbergParametric(_) | SubgroupDescriptor::FinitePreimage(_), GroupDescriptor::Heisenberg) => Ok(()),
            _ => Err(Error::invalid("subgroup descriptor does not match the ambient group")),
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (SubgroupDescriptor::AbelianLattice(l), GroupElement::Vector(v)) => v.len() == l.rank() && l.contains(v),
            (SubgroupDescriptor::HeisenbergParametric(p), GroupElement::Heisenberg(h)) => p.contains(h),
            (SubgroupDescriptor::FinitePreimage(f), GroupElement::Heisenberg(h)) => f.contains(h),
            _ => false,
        }
    }

    /// Normal congruence subgroup contained in this one (its kernel moduli).
    pub fn kernel_moduli(&self) -> Option<HeisModuli> {
        match self {
            SubgroupDescriptor::HeisenbergParametric(p) => Some(p.core_moduli()),
            SubgroupDescriptor::FinitePreimage(f) => Some(f.moduli),
            SubgroupDescriptor::AbelianLattice(_) => None,
        }
    }

    /// Rewrite a Heisenberg subgroup as an explicit preimage over `moduli`,
    /// which must describe a kernel inside the subgroup.
    pub fn to_preimage(&self, moduli: &HeisModuli, limit: u128) -> Result<FinitePreimage> {
        match self {
            SubgroupDescriptor::FinitePreimage(f) => f.lift_to(moduli),
            SubgroupDescriptor::HeisenbergParametric(p) => {
                if !p.contains(&HeisElem::new(moduli.ma, 0, 0))
                    || !p.contains(&HeisElem::new(0, moduli.mb, 0))
                    || !p.contains(&HeisElem::new(0, 0, moduli.mc))
                {
                    return Err(Error::invalid("moduli kernel is not inside the subgroup"));
                }
                let size = (moduli.ma / p.m) as u128 * (moduli.mb / p.n) as u128 * (moduli.mc / p.p) as u128;
                crate::error::check_bound(size, limit)?;
                let mut elements = BTreeSet::new();
                for x in 0..moduli.ma / p.m {
                    for y in 0..moduli.mb / p.n {
                        for z in 0..moduli.mc / p.p {
                            elements.insert(moduli.reduce(&HeisElem::new(x * p.m, y * p.n, z * p.p)));
                        }
                    }
                }
                Ok(FinitePreimage { moduli: *moduli, elements })
            }
            SubgroupDescriptor::AbelianLattice(_) => Err(Error::invalid("abelian lattices have no Heisenberg preimage form")),
        }
    }

    /// `g H g^-1`. Parametric subgroups become explicit preimages over their
    /// core, which every conjugate shares.
    pub fn conjugate(&self, g: &GroupElement, limit: u128) -> Result<SubgroupDescriptor> {
        match (self, g) {
            (SubgroupDescriptor::AbelianLattice(_), GroupElement::Vector(_)) => Ok(self.clone()),
            (SubgroupDescriptor::HeisenbergParametric(p), GroupElement::Heisenberg(_)) => {
                let f = self.to_preimage(&p.core_moduli(), limit)?;
                SubgroupDescriptor::FinitePreimage(f).conjugate(g, limit)
            }
            (SubgroupDescriptor::FinitePreimage(f), GroupElement::Heisenberg(h)) => {
                let elements = f.elements.iter().map(|s| f.moduli.reduce(&h.conj(s))).collect();
                Ok(SubgroupDescriptor::FinitePreimage(FinitePreimage { moduli: f.moduli, elements }))
            }
            _ => Err(Error::invalid("conjugator does not belong to the subgroup's group")),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            SubgroupDescriptor::AbelianLattice(l) => json!({ "family": "abelian", "rank": l.rank(), "hnf": l.rows() }),
            SubgroupDescriptor::HeisenbergParametric(p) => json!({ "family": "heisenberg", "M": p.m, "N": p.n, "P": p.p }),
            SubgroupDescriptor::FinitePreimage(f) => json!({
                "family": "finite-preimage",
                "moduli": [f.moduli.ma, f.moduli.mb, f.moduli.mc],
                "elements": f.elements.iter().map(|g| [g.a, g.b, g.c]).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let family = v.get("family").and_then(|f| f.as_str()).ok_or_else(|| Error::invalid("subgroup needs a \"family\""))?;
        let int = |k: &str| -> Result<i128> {
            v.get(k)
                .and_then(|x| x.as_i64())
                .map(i128::from)
                .ok_or_else(|| Error::invalid(format!("subgroup field {k:?} must be an integer")))
        };
        let triple = |x: &serde_json::Value| -> Result<[i128; 3]> {
            let xs: Vec<i64> = serde_json::from_value(x.clone()).map_err(|e| Error::invalid(e.to_string()))?;
            match xs.as_slice() {
                [a, b, c] => Ok([*a as i128, *b as i128, *c as i128]),
                _ => Err(Error::invalid("expected a coordinate triple")),
            }
        };
        match family {
            "heisenberg" => Self::heisenberg(int("M")?, int("N")?, int("P")?),
            "abelian" => {
                let rank = int("rank")? as usize;
                let rows: Vec<Vec<i64>> = serde_json::from_value(v.get("hnf").cloned().unwrap_or_default())
                    .map_err(|e| Error::invalid(format!("bad hnf: {e}")))?;
                let rows: Vec<Vec<i128>> = rows.into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
                Ok(SubgroupDescriptor::AbelianLattice(Lattice::from_generators(rank, &rows)?))
            }
            "finite-preimage" => {
                let [ma, mb, mc] = triple(v.get("moduli").ok_or_else(|| Error::invalid("missing moduli"))?)?;
                let moduli = HeisModuli::new(ma, mb, mc)?;
                let elems = v.get("elements").and_then(|e| e.as_array()).ok_or_else(|| Error::invalid("missing elements"))?;
                let elems = elems.iter().map(|e| triple(e).map(|[a, b, c]| HeisElem::new(a, b, c))).collect::<Result<Vec<_>>>()?;
                Ok(SubgroupDescriptor::FinitePreimage(FinitePreimage::new(moduli, elems)?))
            }
            other => Err(Error::invalid(format!("unknown subgroup family {other:?}"))),
        }
    }
}

impl Serialize for SubgroupDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubgroupDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        SubgroupDescriptor::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Exact index `[G : H]`.
pub fn index(group: &GroupDescriptor, h: &SubgroupDescriptor) -> Result<u128> {
    h.check_group(group)?;
    Ok(match h {
        SubgroupDescriptor::AbelianLattice(l) => l.det(),
        SubgroupDescriptor::HeisenbergParametric(p) => p.index(),
        SubgroupDescriptor::FinitePreimage(f) => f.index(),
    })
}

/// Largest normal subgroup of `G` inside `H`.
pub fn normal_core(group: &GroupDescriptor, h: &SubgroupDescriptor, limit: u128) -> Result<SubgroupDescriptor> {
    h.check_group(group)?;
    match h {
        SubgroupDescriptor::AbelianLattice(_) => Ok(h.clone()),
        SubgroupDescriptor::HeisenbergParametric(p) => Ok(SubgroupDescriptor::HeisenbergParametric(p.core())),
        SubgroupDescriptor::FinitePreimage(f) => {
            let q = super::quotient::FiniteQuotient::Heisenberg(f.moduli);
            let s = super::quotient::FiniteSubgroup::from_heis(q, f.elements.iter().copied());
            let core = super::oracle::brute_force_core_oracle(&s, limit)?;
            let elements = core.heis_elements().collect();
            Ok(SubgroupDescriptor::FinitePreimage(FinitePreimage { moduli: f.moduli, elements }))
        }
    }
}

/// `inner ⊆ outer` as subgroups of the same group.
pub fn is_subgroup(inner: &SubgroupDescriptor, outer: &SubgroupDescriptor) -> Result<bool> {
    use SubgroupDescriptor::*;
    match (inner, outer) {
        (AbelianLattice(a), AbelianLattice(b)) => Ok(a.rank() == b.rank() && b.contains_lattice(a)),
        (HeisenbergParametric(a), HeisenbergParametric(b)) => Ok(a.is_subgroup_of(b)),
        (FinitePreimage(a), _) => {
            let gens = [HeisElem::new(a.moduli.ma, 0, 0), HeisElem::new(0, a.moduli.mb, 0), HeisElem::new(0, 0, a.moduli.mc)];
            Ok(gens.iter().chain(a.elements.iter()).all(|g| outer.contains(&GroupElement::Heisenberg(*g))))
        }
        (HeisenbergParametric(a), FinitePreimage(_)) => {
            Ok(a.generators().iter().all(|g| outer.contains(&GroupElement::Heisenberg(*g))))
        }
        _ => Err(Error::invalid("cannot compare subgroups of different groups")),
    }
}
