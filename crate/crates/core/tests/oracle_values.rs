//! Frozen values computed by a standalone brute-force oracle over
//! `H(Z/m)`, checked against both the oracle and the library.

use std::collections::HashSet;

use steinitz::chain::{chain_report, level_invariants, EngineOptions, KStarStatus};
use steinitz::dynamics::wild_witness_search;
use steinitz::families::{build_chain, FamilyDescriptor, FinitePrime};
use steinitz::finite_nilpotent::{HeisElem, SubgroupDescriptor};

type Elem = (i64, i64, i64);

/// `H(Z/m)` with the law `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
struct Heis {
    m: i64,
}

impl Heis {
    fn mul(&self, x: Elem, y: Elem) -> Elem {
        let m = self.m;
        ((x.0 + y.0) % m, (x.1 + y.1) % m, (x.2 + y.2 + x.0 * y.1) % m)
    }

    fn inv(&self, x: Elem) -> Elem {
        let m = self.m;
        // (a,b,c)^-1 = (-a, -b, ab - c)
        ((m - x.0) % m, (m - x.1) % m, ((x.0 * x.1 - x.2) % m + m) % m)
    }

    fn all(&self) -> impl Iterator<Item = Elem> + '_ {
        let m = self.m;
        (0..m).flat_map(move |a| (0..m).flat_map(move |b| (0..m).map(move |c| (a, b, c))))
    }

    fn order(&self) -> u128 {
        (self.m as u128).pow(3)
    }

    /// Image of the subgroup `{M | a, N | b, P | c}`.
    fn parametric(&self, (ma, mb, mc): Elem) -> HashSet<Elem> {
        assert!(self.m % ma == 0 && self.m % mb == 0 && self.m % mc == 0);
        self.all().filter(|&(a, b, c)| a % ma == 0 && b % mb == 0 && c % mc == 0).collect()
    }

    /// Intersection of all conjugates.
    fn core(&self, s: &HashSet<Elem>) -> HashSet<Elem> {
        let everything: Vec<Elem> = self.all().collect();
        s.iter()
            .copied()
            .filter(|&x| everything.iter().all(|&g| s.contains(&self.mul(self.mul(self.inv(g), x), g))))
            .collect()
    }
}

/// `(m, n, k)` of a level, then the order of the image of a deeper level in
/// `D_ℓ`.
fn oracle_level(modulus: i64, level: Elem, deeper: Elem) -> (u128, u128, u128, u128) {
    let q = Heis { m: modulus };
    let s = q.parametric(level);
    let core = q.core(&s);
    let t = q.parametric(deeper);
    let meet = t.intersection(&core).count() as u128;
    let (s_len, c_len) = (s.len() as u128, core.len() as u128);
    (q.order() / s_len, q.order() / c_len, s_len / c_len, t.len() as u128 / meet)
}

#[test]
fn selfembed_levels_match_enumeration() {
    // Γ_ℓ = (2^ℓ, 2^ℓ, 2^2ℓ); level 1 computed mod 16 so Γ_2 is visible.
    let frozen_1 = (16, 64, 4, 1);
    let frozen_2 = (256, 4096, 16, 16);
    assert_eq!(oracle_level(16, (2, 2, 4), (4, 4, 16)), frozen_1);
    assert_eq!(oracle_level(16, (4, 4, 16), (4, 4, 16)), frozen_2);

    let spec = build_chain(&FamilyDescriptor::HeisenbergSelfEmbed { p: 2 }, 2).unwrap();
    let opts = EngineOptions::default();
    for (level, (m, n, k, _)) in [(1, frozen_1), (2, frozen_2)] {
        let inv = level_invariants(&spec, level, &opts).unwrap();
        assert_eq!((inv.m, inv.n, inv.k), (m, n, k));
        assert_eq!(inv.k_star.value, 1);
    }
}

#[test]
fn toy_models_have_trivial_core() {
    for (p, n, k) in [(2i64, 2u32, 1u32), (3, 2, 1), (2, 3, 2)] {
        let pn = p.pow(n);
        let q = Heis { m: pn };
        let isotropy = q.parametric((p.pow(k), pn, pn));
        assert_eq!(q.order(), (p as u128).pow(3 * n));
        assert_eq!(isotropy.len() as u128, (p as u128).pow(n - k));
        assert_eq!(q.core(&isotropy).len(), 1);

        let spec = build_chain(&FamilyDescriptor::ToyModel { p: p as u64, n, k }, 1).unwrap();
        let inv = level_invariants(&spec, 1, &EngineOptions::default()).unwrap();
        assert_eq!(inv.n, (p as u128).pow(3 * n));
        assert_eq!(inv.k, (p as u128).pow(n - k));
        assert_eq!(inv.k_star.value, inv.k);
    }
}

/// Prime-by-prime oracle for `pi_f = {(2,2,1),(3,2,1)}`, `pi_infty = {5}`:
/// `Γ_ℓ = (2·3·5^ℓ, 4·9·5^ℓ, 4·9·5^ℓ)` splits into Sylow factors.
#[test]
fn stable_family_discriminant_is_six() {
    let two = oracle_level(4, (2, 4, 4), (2, 4, 4));
    let three = oracle_level(9, (3, 9, 9), (3, 9, 9));
    let five = oracle_level(25, (5, 5, 5), (25, 25, 25));
    assert_eq!((two.2, two.3), (2, 2));
    assert_eq!((three.2, three.3), (3, 3));
    assert_eq!((five.2, five.3), (1, 1));
    let frozen_k = two.2 * three.2 * five.2;
    assert_eq!(frozen_k, 6);

    let f = FamilyDescriptor::HeisenbergStable {
        pi_f: vec![FinitePrime { q: 2, n: 2, r: 1 }, FinitePrime { q: 3, n: 2, r: 1 }],
        pi_infty: vec![5],
    };
    let report = chain_report(&build_chain(&f, 3).unwrap(), &EngineOptions::default()).unwrap();
    for l in &report.levels {
        assert_eq!(l.k, frozen_k);
        assert_eq!(l.k_star.value, frozen_k);
        assert!(matches!(l.k_star.status, KStarStatus::Stabilized { .. }));
    }
}

#[test]
fn smaller_stable_family_by_direct_enumeration() {
    // pi_f = {(2,2,1)}, pi_infty = {3}: Γ_1 = (6, 12, 12), Γ_2 = (18, 36, 36).
    let frozen = (864, 1728, 2, 2);
    assert_eq!(oracle_level(36, (6, 12, 12), (18, 36, 36)), frozen);
    let f = FamilyDescriptor::HeisenbergStable { pi_f: vec![FinitePrime { q: 2, n: 2, r: 1 }], pi_infty: vec![3] };
    let spec = build_chain(&f, 2).unwrap();
    let inv = level_invariants(&spec, 1, &EngineOptions::default()).unwrap();
    assert_eq!((inv.m, inv.n, inv.k, inv.k_star.value), frozen);
}

#[test]
fn wild_witness_checked_by_hand() {
    let f = FamilyDescriptor::HeisenbergWild {
        prefix: [2, 3, 5].iter().map(|&q| FinitePrime { q, n: 2, r: 1 }).collect(),
        n: 2,
        r: 1,
        pi_infty: vec![],
    };
    let spec = build_chain(&f, 2).unwrap();
    let levels: Vec<Elem> = (1..=4)
        .map(|l| match spec.subgroup(l, 1000).unwrap() {
            SubgroupDescriptor::HeisenbergParametric(p) => (p.m as i64, p.n as i64, p.p as i64),
            other => panic!("unexpected level {other:?}"),
        })
        .collect();
    assert_eq!(levels, vec![(2, 4, 4), (6, 36, 36), (30, 900, 900), (210, 44100, 44100)]);

    let g: Elem = (14700, 0, 0);
    let big = Heis { m: 44100 };
    let inside = |x: Elem, (ma, mb, mc): Elem| x.0 % ma == 0 && x.1 % mb == 0 && x.2 % mc == 0;
    let conj = |h: Elem| big.mul(big.mul(big.inv(h), g), h);
    let deep = levels[1];
    for (t, gamma_t) in [(3, levels[2]), (4, levels[3])] {
        // every coset hΓ_T with h ∈ Γ_2 is fixed; c of h does not enter
        for x in (0..gamma_t.0).step_by(deep.0 as usize) {
            for y in (0..gamma_t.1).step_by(deep.1 as usize) {
                assert!(inside(conj((x, y, 0)), gamma_t), "moved ({x},{y}) at depth {t}");
            }
        }
        // while (0, 4, 0) ∈ Γ_1 is moved
        assert!(!inside(conj((0, 4, 0)), gamma_t));
    }

    let w = wild_witness_search(&spec, 1, 2, 100_000).unwrap().expect("witness");
    assert_eq!(w.element, HeisElem::new(14700, 0, 0));
    assert_eq!(w.moved_cylinder, HeisElem::new(0, 4, 0));
    assert_eq!(w.transcript[0].fixed_cylinders_checked, 5 * 25 * 25);
}
