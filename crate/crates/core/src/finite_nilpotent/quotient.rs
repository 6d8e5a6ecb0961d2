use std::collections::VecDeque;

use super::heisenberg::{HeisElem, HeisModuli};
use super::lattice::Lattice;
use super::subgroup::{GroupDescriptor, GroupElement, SubgroupDescriptor};
use crate::error::{check_bound, Error, Result};

fn gcd(a: i128, b: i128) -> i128 {
    crate::supernatural::primes::gcd(a.unsigned_abs(), b.unsigned_abs()) as i128
}

/// `Γ / C` for a normal congruence subgroup `C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FiniteQuotient {
    Heisenberg(HeisModuli),
    Abelian(Lattice),
}

impl FiniteQuotient {
    pub fn order(&self) -> u128 {
        match self {
            FiniteQuotient::Heisenberg(m) => m.order(),
            FiniteQuotient::Abelian(l) => l.det(),
        }
    }

    pub fn group(&self) -> GroupDescriptor {
        match self {
            FiniteQuotient::Heisenberg(_) => GroupDescriptor::Heisenberg,
            FiniteQuotient::Abelian(l) => GroupDescriptor::FreeAbelian { rank: l.rank() },
        }
    }

    pub fn identity(&self) -> GroupElement {
        self.group().identity()
    }

    pub fn reduce(&self, g: &GroupElement) -> GroupElement {
        match (self, g) {
            (FiniteQuotient::Heisenberg(m), GroupElement::Heisenberg(h)) => GroupElement::Heisenberg(m.reduce(h)),
            (FiniteQuotient::Abelian(l), GroupElement::Vector(v)) => GroupElement::Vector(l.reduce(v)),
            _ => panic!("element does not belong to the quotient's group"),
        }
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let prod = self.group().mul(g, h).expect("elements of one quotient");
        self.reduce(&prod)
    }

    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        self.reduce(&self.group().inv(g))
    }

    /// Dense index in `0..order` of the class of `g`.
    pub fn index_of(&self, g: &GroupElement) -> usize {
        match (self, g) {
            (FiniteQuotient::Heisenberg(m), GroupElement::Heisenberg(h)) => m.index_of(h),
            (FiniteQuotient::Abelian(l), GroupElement::Vector(v)) => {
                let r = l.reduce(v);
                let mut idx = 0usize;
                for (x, p) in r.iter().zip(l.pivots()) {
                    idx = idx * p as usize + *x as usize;
                }
                idx
            }
            _ => panic!("element does not belong to the quotient's group"),
        }
    }

    pub fn element_at(&self, idx: usize) -> GroupElement {
        match self {
            FiniteQuotient::Heisenberg(m) => GroupElement::Heisenberg(m.element_at(idx)),
            FiniteQuotient::Abelian(l) => {
                let pivots = l.pivots();
                let mut v = vec![0i128; pivots.len()];
                let mut rest = idx;
                for i in (0..pivots.len()).rev() {
                    v[i] = (rest % pivots[i] as usize) as i128;
                    rest /= pivots[i] as usize;
                }
                GroupElement::Vector(v)
            }
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order() as usize).map(move |i| self.element_at(i))
    }

    /// Images of the standard generators of `Γ`.
    pub fn generators(&self) -> Vec<GroupElement> {
        self.group().generators().iter().map(|g| self.reduce(g)).collect()
    }

    /// Does the kernel of `self` lie inside the kernel of `coarse`?
    pub fn refines(&self, coarse: &FiniteQuotient) -> bool {
        match (self, coarse) {
            (FiniteQuotient::Heisenberg(f), FiniteQuotient::Heisenberg(c)) => c.refines(f),
            (FiniteQuotient::Abelian(f), FiniteQuotient::Abelian(c)) => c.contains_lattice(f),
            _ => false,
        }
    }

    fn check_enumerable(&self, limit: u128) -> Result<()> {
        check_bound(self.order(), limit)
    }
}

/// Subgroup of a [`FiniteQuotient`] as a dense membership bitmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubgroup {
    quotient: FiniteQuotient,
    members: Vec<bool>,
    order: u128,
}

impl FiniteSubgroup {
    /// Subgroup generated by `gens`.
    pub fn generated_by(quotient: FiniteQuotient, gens: &[GroupElement], limit: u128) -> Result<Self> {
        quotient.check_enumerable(limit)?;
        let gens: Vec<GroupElement> = gens.iter().map(|g| quotient.reduce(g)).collect();
        let mut members = vec![false; quotient.order() as usize];
        let id = quotient.identity();
        members[quotient.index_of(&id)] = true;
        let mut queue = VecDeque::from([id]);
        let mut order = 1u128;
        while let Some(g) = queue.pop_front() {
            for s in &gens {
                let h = quotient.mul(&g, s);
                let i = quotient.index_of(&h);
                if !members[i] {
                    members[i] = true;
                    order += 1;
                    queue.push_back(h);
                }
            }
        }
        Ok(FiniteSubgroup { quotient, members, order })
    }

    /// Wrap an element set already known to be a subgroup.
    pub fn from_elements(quotient: FiniteQuotient, elems: impl IntoIterator<Item = GroupElement>) -> Self {
        let mut members = vec![false; quotient.order() as usize];
        for g in elems {
            members[quotient.index_of(&g)] = true;
        }
        let order = members.iter().filter(|&&b| b).count() as u128;
        FiniteSubgroup { quotient, members, order }
    }

    pub fn from_heis(quotient: FiniteQuotient, elems: impl IntoIterator<Item = HeisElem>) -> Self {
        Self::from_elements(quotient, elems.into_iter().map(GroupElement::Heisenberg))
    }

    pub fn whole(quotient: FiniteQuotient, limit: u128) -> Result<Self> {
        quotient.check_enumerable(limit)?;
        let n = quotient.order();
        Ok(FiniteSubgroup { members: vec![true; n as usize], order: n, quotient })
    }

    pub fn trivial(quotient: FiniteQuotient, limit: u128) -> Result<Self> {
        Self::generated_by(quotient, &[], limit)
    }

    pub fn quotient(&self) -> &FiniteQuotient {
        &self.quotient
    }

    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.members[self.quotient.index_of(g)]
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        self.members.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.quotient.element_at(i))
    }

    pub fn heis_elements(&self) -> impl Iterator<Item = HeisElem> + '_ {
        self.elements().filter_map(|g| g.heis().copied())
    }

    pub fn intersect(&self, other: &FiniteSubgroup) -> Result<FiniteSubgroup> {
        if self.quotient != other.quotient {
            return Err(Error::invalid("subgroups live in different quotients"));
        }
        let members: Vec<bool> = self.members.iter().zip(&other.members).map(|(a, b)| *a && *b).collect();
        let order = members.iter().filter(|&&b| b).count() as u128;
        Ok(FiniteSubgroup { quotient: self.quotient.clone(), members, order })
    }

    /// Image under the reduction `self.quotient -> coarse`.
    pub fn project(&self, coarse: &FiniteQuotient, limit: u128) -> Result<FiniteSubgroup> {
        if !self.quotient.refines(coarse) {
            return Err(Error::invalid("target quotient is not a further quotient"));
        }
        coarse.check_enumerable(limit)?;
        Ok(FiniteSubgroup::from_elements(coarse.clone(), self.elements().map(|g| coarse.reduce(&g))))
    }

    /// Normal in its quotient: stable under conjugation by the generators.
    pub fn is_normal(&self) -> bool {
        let gens = self.quotient.generators();
        self.elements().all(|s| {
            gens.iter().all(|g| {
                let c = self.quotient.mul(&self.quotient.mul(g, &s), &self.quotient.inv(g));
                self.contains(&c)
            })
        })
    }
}

/// `Γ / C`. `C` must be normal.
pub fn quotient(group: &GroupDescriptor, c: &SubgroupDescriptor) -> Result<FiniteQuotient> {
    c.check_group(group)?;
    match c {
        SubgroupDescriptor::AbelianLattice(l) => Ok(FiniteQuotient::Abelian(l.clone())),
        SubgroupDescriptor::HeisenbergParametric(p) => {
            if !p.is_normal() {
                return Err(Error::NotNormal(format!("({}, {}, {}) needs P | M and P | N", p.m, p.n, p.p)));
            }
            Ok(FiniteQuotient::Heisenberg(HeisModuli::new(p.m, p.n, p.p)?))
        }
        SubgroupDescriptor::FinitePreimage(f) => {
            let kernel_only = f.elements.len() == 1;
            if kernel_only {
                Ok(FiniteQuotient::Heisenberg(f.moduli))
            } else {
                Err(Error::NotNormal("quotients by explicit preimages are taken inside their ambient quotient".into()))
            }
        }
    }
}

/// Generators of `H` as elements of `Γ`.
pub fn subgroup_generators(h: &SubgroupDescriptor) -> Vec<GroupElement> {
    match h {
        SubgroupDescriptor::AbelianLattice(l) => l.rows().iter().cloned().map(GroupElement::Vector).collect(),
        SubgroupDescriptor::HeisenbergParametric(p) => p.generators().into_iter().map(GroupElement::Heisenberg).collect(),
        SubgroupDescriptor::FinitePreimage(f) => {
            let m = f.moduli;
            [HeisElem::new(m.ma, 0, 0), HeisElem::new(0, m.mb, 0), HeisElem::new(0, 0, m.mc)]
                .into_iter()
                .chain(f.elements.iter().copied())
                .map(GroupElement::Heisenberg)
                .collect()
        }
    }
}

/// Image `HC/C` of `H` in `Q = Γ/C`, enumerated.
pub fn image_in_quotient(h: &SubgroupDescriptor, q: &FiniteQuotient, limit: u128) -> Result<FiniteSubgroup> {
    h.check_group(&q.group())?;
    FiniteSubgroup::generated_by(q.clone(), &subgroup_generators(h), limit)
}

/// Order of `HC/C` without enumeration.
pub fn image_order(h: &SubgroupDescriptor, q: &FiniteQuotient, limit: u128) -> Result<u128> {
    match (h, q) {
        (SubgroupDescriptor::HeisenbergParametric(p), FiniteQuotient::Heisenberg(m)) => Ok((m.ma / gcd(m.ma, p.m)) as u128
            * (m.mb / gcd(m.mb, p.n)) as u128
            * (m.mc / gcd(m.mc, p.p)) as u128),
        (SubgroupDescriptor::AbelianLattice(l), FiniteQuotient::Abelian(k)) => Ok(k.det() / k.join(l)?.det()),
        _ => Ok(image_in_quotient(h, q, limit)?.order()),
    }
}

#[cfg(test)]
mod quotient_tests {
    use super::*;

    #[test]
    fn heisenberg_quotient_orders() {
        let h = GroupDescriptor::Heisenberg;
        for l in 1..=2u32 {
            let q = 2i128.pow(2 * l);
            let c = SubgroupDescriptor::heisenberg(q, q, q).unwrap();
            assert_eq!(quotient(&h, &c).unwrap().order(), 2u128.pow(6 * l));
        }
        let whole = SubgroupDescriptor::heisenberg(1, 1, 1).unwrap();
        assert_eq!(quotient(&h, &whole).unwrap().order(), 1);
        let not_normal = SubgroupDescriptor::heisenberg(2, 2, 4).unwrap();
        assert!(matches!(quotient(&h, &not_normal), Err(Error::NotNormal(_))));
    }

    #[test]
    fn abelian_quotient() {
        let z2 = GroupDescriptor::FreeAbelian { rank: 2 };
        let q = quotient(&z2, &SubgroupDescriptor::abelian_diagonal(&[2, 3]).unwrap()).unwrap();
        assert_eq!(q.order(), 6);
        for i in 0..6 {
            assert_eq!(q.index_of(&q.element_at(i)), i);
        }
        let whole = FiniteSubgroup::generated_by(q.clone(), &q.generators(), 100).unwrap();
        assert_eq!(whole.order(), 6);
    }

    #[test]
    fn images_match_closed_form() {
        let q = FiniteQuotient::Heisenberg(HeisModuli::uniform(4).unwrap());
        let h = SubgroupDescriptor::heisenberg(2, 2, 4).unwrap();
        let img = image_in_quotient(&h, &q, 10_000).unwrap();
        assert_eq!(img.order(), 4);
        assert_eq!(image_order(&h, &q, 10_000).unwrap(), 4);
        let whole = SubgroupDescriptor::heisenberg(1, 1, 1).unwrap();
        assert_eq!(image_in_quotient(&whole, &q, 10_000).unwrap().order(), 64);
    }

    #[test]
    fn enumeration_respects_limit() {
        let q = FiniteQuotient::Heisenberg(HeisModuli::uniform(64).unwrap());
        let h = SubgroupDescriptor::heisenberg(1, 1, 1).unwrap();
        assert!(matches!(image_in_quotient(&h, &q, 1000), Err(Error::ResourceBound { .. })));
        assert_eq!(image_order(&h, &q, 1000).unwrap(), 64u128.pow(3));
    }
}
