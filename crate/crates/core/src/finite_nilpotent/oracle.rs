//! Exhaustive counterparts of the closed forms, for cross-checking.

use std::collections::VecDeque;

use super::heisenberg::HeisModuli;
use super::quotient::{image_in_quotient, FiniteQuotient, FiniteSubgroup};
use super::subgroup::{GroupDescriptor, SubgroupDescriptor};
use crate::error::{check_bound, Error, Result};

/// Left coset representatives of `s` in its quotient.
pub fn left_coset_reps(s: &FiniteSubgroup, limit: u128) -> Result<Vec<usize>> {
    let q = s.quotient();
    check_bound(q.order(), limit)?;
    let members: Vec<_> = s.elements().collect();
    let mut seen = vec![false; q.order() as usize];
    let mut reps = Vec::new();
    for i in 0..seen.len() {
        if seen[i] {
            continue;
        }
        reps.push(i);
        let g = q.element_at(i);
        for t in &members {
            seen[q.index_of(&q.mul(&g, t))] = true;
        }
    }
    Ok(reps)
}

/// `⋂_{g ∈ Q} g S g⁻¹` by enumeration.
pub fn brute_force_core_oracle(s: &FiniteSubgroup, limit: u128) -> Result<FiniteSubgroup> {
    let q = s.quotient().clone();
    let reps: Vec<_> = left_coset_reps(s, limit)?.into_iter().map(|i| q.element_at(i)).collect();
    let core: Vec<_> = s
        .elements()
        .filter(|x| {
            reps.iter().all(|h| {
                let c = q.mul(&q.mul(&q.inv(h), x), h);
                s.contains(&c)
            })
        })
        .collect();
    Ok(FiniteSubgroup::from_elements(q, core))
}

/// Working quotient large enough to contain the core of a Heisenberg
/// parametric subgroup: `H/(L,L,L)` with `L = lcm(M, N, P)`.
pub fn oracle_moduli(h: &SubgroupDescriptor) -> Result<FiniteQuotient> {
    use crate::supernatural::primes::lcm;
    match h {
        SubgroupDescriptor::HeisenbergParametric(p) => {
            let l = lcm(lcm(p.m as u128, p.n as u128), p.p as u128);
            let l = i128::try_from(l).map_err(|_| Error::Overflow("oracle modulus".into()))?;
            Ok(FiniteQuotient::Heisenberg(HeisModuli::uniform(l)?))
        }
        SubgroupDescriptor::FinitePreimage(f) => Ok(FiniteQuotient::Heisenberg(f.moduli)),
        SubgroupDescriptor::AbelianLattice(l) => Ok(FiniteQuotient::Abelian(l.clone())),
    }
}

/// Core of `H` computed by conjugate intersection in [`oracle_moduli`].
pub fn core_by_enumeration(h: &SubgroupDescriptor, limit: u128) -> Result<FiniteSubgroup> {
    let q = oracle_moduli(h)?;
    let s = image_in_quotient(h, &q, limit)?;
    brute_force_core_oracle(&s, limit)
}

/// `[Γ : H]` as the orbit size of the base coset under the generators.
pub fn index_by_orbit(group: &GroupDescriptor, h: &SubgroupDescriptor, limit: u128) -> Result<u128> {
    h.check_group(group)?;
    let q = oracle_moduli(h)?;
    let s = image_in_quotient(h, &q, limit)?;
    let members: Vec<_> = s.elements().collect();
    let label = |g: &super::subgroup::GroupElement| -> usize {
        members.iter().map(|t| q.index_of(&q.mul(g, t))).min().expect("subgroup is non-empty")
    };
    let gens = q.generators();
    let mut seen = std::collections::HashSet::new();
    let id = q.identity();
    seen.insert(label(&id));
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for x in &gens {
            let h = q.mul(x, &g);
            if seen.insert(label(&h)) {
                check_bound(seen.len() as u128, limit)?;
                queue.push_back(h);
            }
        }
    }
    Ok(seen.len() as u128)
}

#[cfg(test)]
mod oracle_tests {
    use super::*;
    use crate::finite_nilpotent::heisenberg::HeisElem;
    use crate::finite_nilpotent::subgroup::GroupElement;

    #[test]
    fn core_of_toy_subgroup_is_trivial() {
        let q = FiniteQuotient::Heisenberg(HeisModuli::uniform(4).unwrap());
        let s = FiniteSubgroup::generated_by(
            q,
            &[GroupElement::Heisenberg(HeisElem::new(2, 0, 0)), GroupElement::Heisenberg(HeisElem::new(0, 2, 0))],
            1000,
        )
        .unwrap();
        // (2,0,0) and (0,2,0) generate (0,0,4) = identity mod 4
        assert_eq!(s.order(), 4);
        assert!(brute_force_core_oracle(&s, 1000).unwrap().is_trivial());
    }

    #[test]
    fn core_of_normal_and_whole() {
        let q = FiniteQuotient::Heisenberg(HeisModuli::uniform(4).unwrap());
        let center = FiniteSubgroup::generated_by(q.clone(), &[GroupElement::Heisenberg(HeisElem::z())], 1000).unwrap();
        assert_eq!(brute_force_core_oracle(&center, 1000).unwrap(), center);
        let whole = FiniteSubgroup::whole(q, 1000).unwrap();
        assert_eq!(brute_force_core_oracle(&whole, 1000).unwrap(), whole);
    }

    #[test]
    fn orbit_index_matches_product() {
        let h = GroupDescriptor::Heisenberg;
        assert_eq!(index_by_orbit(&h, &SubgroupDescriptor::heisenberg(2, 2, 4).unwrap(), 10_000).unwrap(), 16);
        assert_eq!(index_by_orbit(&h, &SubgroupDescriptor::heisenberg(2, 3, 6).unwrap(), 10_000).unwrap(), 36);
        let z2 = GroupDescriptor::FreeAbelian { rank: 2 };
        assert_eq!(index_by_orbit(&z2, &SubgroupDescriptor::abelian_diagonal(&[2, 3]).unwrap(), 100).unwrap(), 6);
    }
}
