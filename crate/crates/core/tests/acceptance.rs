//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any failure.

use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use steinitz::chain::{chain_report, heis, level_invariants, verify_level, Backend, ChainReport, EngineOptions, KStarStatus};
use steinitz::dynamics::{classify_stability, verify_witness, wild_witness_search, ClassifyOptions, Verdict};
use steinitz::families::{build_chain, expected_classification, FamilyDescriptor, FinitePrime, ToralParams};
use steinitz::finite_nilpotent::oracle::oracle_moduli;
use steinitz::finite_nilpotent::{
    brute_force_core_oracle, image_in_quotient, image_order, normal_core, sylow_decompose, GroupDescriptor,
    SubgroupDescriptor,
};
use steinitz::solenoid::{compare_presentations, Presentation};
use steinitz::{Exponent, SteinitzNumber, Truth};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: steinitz::Error) -> String {
    e.to_string()
}

fn selfembed_golden() -> Outcome {
    let spec = build_chain(&FamilyDescriptor::HeisenbergSelfEmbed { p: 2 }, 3).map_err(err)?;
    let report = chain_report(&spec, &EngineOptions::default()).map_err(err)?;
    for (l, inv) in (1u32..).zip(&report.levels) {
        let q = 1u128 << (2 * l);
        ensure(inv.n == 1 << (6 * l), format!("n_{l} = {}", inv.n))?;
        ensure(inv.k == q, format!("k_{l} = {}", inv.k))?;
        ensure(inv.n == inv.m * inv.k, format!("Lagrange fails at level {l}"))?;
        ensure(inv.k_star.value == 1, format!("k*_{l} = {}", inv.k_star.value))?;
        match inv.k_star.status {
            KStarStatus::Stabilized { depth } if depth <= 2 * l as usize => {}
            other => return Err(format!("k*_{l} status {other:?}")),
        }
        let q = q as i128;
        let expected = SubgroupDescriptor::heisenberg(q, q, q).map_err(err)?;
        ensure(inv.core.as_ref() == Some(&expected), format!("core at level {l}: {:?}", inv.core))?;
    }
    Ok("n = 2^{6l}, k = 2^{2l}, k* = 1, cores (4,4,4), (16,16,16), (64,64,64)".into())
}

fn toy_orders() -> Outcome {
    for (p, n, k) in [(2u64, 2u32, 1u32), (3, 2, 1), (2, 3, 2)] {
        let spec = build_chain(&FamilyDescriptor::ToyModel { p, n, k }, 1).map_err(err)?;
        let inv = level_invariants(&spec, 1, &EngineOptions::default()).map_err(err)?;
        let p = p as u128;
        ensure(inv.n == p.pow(3 * n), format!("|G| = {} for {:?}", inv.n, (p, n, k)))?;
        ensure(inv.k == p.pow(n - k), format!("|H| = {} for {:?}", inv.k, (p, n, k)))?;
        let oracle = verify_level(&spec, &inv, &EngineOptions::default()).map_err(err)?;
        ensure(oracle.status == "verified", format!("brute force {} for {:?}", oracle.status, (p, n, k)))?;
        let h = spec.subgroup(1, 100_000).map_err(err)?;
        let q = oracle_moduli(&h).map_err(err)?;
        let core = brute_force_core_oracle(&image_in_quotient(&h, &q, 100_000).map_err(err)?, 100_000).map_err(err)?;
        ensure(core.order() == 1, format!("core order {} for {:?}", core.order(), (p, n, k)))?;
    }
    Ok("|G| = p^{3n}, |H| = p^{n-k}, trivial cores; brute force agrees".into())
}

fn wild_witness() -> Outcome {
    let f = FamilyDescriptor::HeisenbergWild {
        prefix: [2, 3, 5].iter().map(|&q| FinitePrime { q, n: 2, r: 1 }).collect(),
        n: 2,
        r: 1,
        pi_infty: vec![],
    };
    let spec = build_chain(&f, 2).map_err(err)?;
    let limit = 100_000;
    let w = wild_witness_search(&spec, 1, 2, limit).map_err(err)?.ok_or("no witness found")?;
    let checked = verify_witness(&spec, &w, limit).map_err(err)?;
    ensure(checked == w, "re-verified transcript differs")?;
    Ok(format!(
        "g = ({}, {}, {}) fixes {} deep cylinder cosets and moves ({}, {}, {})",
        w.element.a, w.element.b, w.element.c, w.fixed_cylinders_checked, w.moved_cylinder.a, w.moved_cylinder.b, w.moved_cylinder.c
    ))
}

fn stability_certificates() -> Outcome {
    let f = FamilyDescriptor::HeisenbergStable {
        pi_f: vec![FinitePrime { q: 2, n: 2, r: 1 }, FinitePrime { q: 3, n: 2, r: 1 }],
        pi_infty: vec![5],
    };
    let spec = build_chain(&f, 3).map_err(err)?;
    let c = classify_stability(&spec, &ClassifyOptions::default()).map_err(err)?;
    ensure(c.verdict == Verdict::Stable, format!("verdict {:?}", c.verdict))?;
    ensure(c.certificate.is_some(), "no certificate")?;
    let report = chain_report(&spec, &EngineOptions::default()).map_err(err)?;
    for l in &report.levels {
        ensure(l.k_star.value == 6 && l.k_star.status.is_stabilized(), format!("k*_{} = {:?}", l.level, l.k_star))?;
    }
    let torals = [
        ToralParams { pi_f: vec![(2, 3)], pi_infty: vec![3] },
        ToralParams { pi_f: vec![], pi_infty: vec![2] },
        ToralParams { pi_f: vec![(5, 1), (7, 2)], pi_infty: vec![] },
    ];
    for t in torals {
        let f = FamilyDescriptor::ToralDiagonal(t);
        let spec = build_chain(&f, f.depth_limit().map_or(4, |d| d.min(4))).map_err(err)?;
        let report = chain_report(&spec, &EngineOptions::default()).map_err(err)?;
        for l in &report.levels {
            ensure(l.k == 1 && l.k_star.value == 1, format!("toral level {} has k = {}, k* = {}", l.level, l.k, l.k_star.value))?;
        }
    }
    Ok("heis-stable is stable with k* = 6; toral k = k* = 1".into())
}

fn solenoid_decisions() -> Outcome {
    let dyadic = Presentation::periodic(vec![2]).map_err(err)?;
    let quaternary = Presentation::periodic(vec![4]).map_err(err)?;
    let mixed = Presentation::periodic(vec![2, 3]).map_err(err)?;
    let same = compare_presentations(&dyadic, &quaternary).map_err(err)?;
    ensure(same.asymptotically_equivalent == Truth::True && same.homeomorphic == Some(Truth::True), format!("{same:?}"))?;
    let different = compare_presentations(&dyadic, &mixed).map_err(err)?;
    ensure(
        different.asymptotically_equivalent == Truth::False && different.homeomorphic == Some(Truth::False),
        format!("{different:?}"),
    )?;
    let finite_start = Presentation::new(vec![3, 5, 7], Some(steinitz::solenoid::DegreeTail::Periodic(vec![2, 3])), 1).map_err(err)?;
    let dropped = finite_start.drop_first(3).map_err(err)?;
    let truncated = compare_presentations(&finite_start, &dropped).map_err(err)?;
    ensure(truncated.homeomorphic == Some(Truth::True), format!("{truncated:?}"))?;
    Ok("(2,..) ~ (4,..) true; (2,..) vs (2,3,..) false; dropping 3 degrees keeps the class".into())
}

fn random_number(runner: &mut TestRunner) -> SteinitzNumber {
    let primes = vec![2u64, 3, 5, 7, 11, 13];
    let exponent = proptest::prop_oneof![4 => (1u64..6).prop_map(Exponent::Finite), 1 => proptest::strategy::Just(Exponent::Infinity)];
    let strategy = proptest::collection::btree_map(proptest::sample::select(primes), exponent, 0..5);
    SteinitzNumber::from_pairs(strategy.new_tree(runner).expect("strategy").current()).expect("valid pairs")
}

fn lcm_mul_laws() -> Result<(), String> {
    let mut runner = TestRunner::deterministic();
    let one = SteinitzNumber::one();
    for _ in 0..1000 {
        let (a, b, c) = (random_number(&mut runner), random_number(&mut runner), random_number(&mut runner));
        let l = |x: &SteinitzNumber, y: &SteinitzNumber| x.lcm(y).map_err(err);
        let m = |x: &SteinitzNumber, y: &SteinitzNumber| x.mul(y).map_err(err);
        ensure(l(&a, &b)? == l(&b, &a)?, "lcm not commutative")?;
        ensure(l(&l(&a, &b)?, &c)? == l(&a, &l(&b, &c)?)?, "lcm not associative")?;
        ensure(l(&a, &a)? == a && l(&a, &one)? == a, "lcm idempotence or unit fails")?;
        ensure(m(&a, &b)? == m(&b, &a)?, "mul not commutative")?;
        ensure(m(&m(&a, &b)?, &c)? == m(&a, &m(&b, &c)?)?, "mul not associative")?;
        ensure(l(&a, &b)?.divides(&m(&a, &b)?).map_err(err)?, "lcm does not divide product")?;
    }
    Ok(())
}

fn family_grid() -> Vec<FamilyDescriptor> {
    let fp = |q, n, r| FinitePrime { q, n, r };
    let mut grid = vec![
        FamilyDescriptor::ToralDiagonal(ToralParams { pi_f: vec![(3, 2)], pi_infty: vec![2] }),
        FamilyDescriptor::ToralDiagonal(ToralParams { pi_f: vec![(2, 1), (5, 2)], pi_infty: vec![] }),
        FamilyDescriptor::ToralProduct {
            factors: vec![
                ToralParams { pi_f: vec![], pi_infty: vec![2] },
                ToralParams { pi_f: vec![(3, 1)], pi_infty: vec![5] },
            ],
        },
        FamilyDescriptor::HeisenbergStable { pi_f: vec![fp(2, 2, 1), fp(3, 2, 1)], pi_infty: vec![5] },
        FamilyDescriptor::HeisenbergStable { pi_f: vec![fp(3, 3, 2)], pi_infty: vec![2] },
        FamilyDescriptor::HeisenbergStable { pi_f: vec![], pi_infty: vec![7] },
    ];
    grid.extend([2, 3, 5, 7].map(|p| FamilyDescriptor::HeisenbergSelfEmbed { p }));
    for (n, r) in [(1, 1), (2, 1), (2, 2)] {
        for prefix in [vec![], vec![fp(7, 1, 1), fp(5, 2, 1)], vec![fp(2, 2, 1)]] {
            grid.push(FamilyDescriptor::HeisenbergWild { prefix: prefix.clone(), n, r, pi_infty: vec![] });
            grid.push(FamilyDescriptor::HeisenbergWild { prefix, n, r, pi_infty: vec![3] });
        }
    }
    for (p, n, k) in [(2, 2, 1), (3, 2, 1), (2, 3, 2), (5, 1, 0)] {
        grid.push(FamilyDescriptor::ToyModel { p, n, k });
    }
    grid
}

fn family_spec(f: &FamilyDescriptor, depth: usize) -> Result<steinitz::chain::ChainSpec, String> {
    build_chain(f, f.depth_limit().map_or(depth, |d| d.min(depth))).map_err(err)
}

fn monotone(f: &FamilyDescriptor, r: &ChainReport) -> Result<(), String> {
    ensure(r.lagrange_ok, format!("Lagrange fails for {f:?}"))?;
    for l in &r.levels {
        ensure(l.n == l.m * l.k && l.k_star.value <= l.k, format!("level {} of {f:?}", l.level))?;
    }
    for w in r.levels.windows(2) {
        ensure(w[1].m > w[0].m, format!("m not increasing in {f:?}"))?;
        ensure(w[1].n >= w[0].n && w[1].k_star.value >= w[0].k_star.value, format!("n or k* decreases in {f:?}"))?;
    }
    Ok(())
}

fn small_parametric() -> Vec<SubgroupDescriptor> {
    let divisors = [1i128, 2, 3, 4, 6, 9, 12, 18, 36, 5, 10, 15, 45];
    let mut out = Vec::new();
    for &m in &divisors {
        for &n in &divisors {
            for &p in &divisors {
                if (m * n) % p != 0 {
                    continue;
                }
                let Ok(h) = SubgroupDescriptor::heisenberg(m, n, p) else { continue };
                match oracle_moduli(&h) {
                    Ok(q) if q.order() <= 100_000 => out.push(h),
                    _ => {}
                }
            }
        }
    }
    out
}

fn property_suites() -> Outcome {
    lcm_mul_laws()?;
    let grid = family_grid();
    for f in &grid {
        let report = chain_report(&family_spec(f, 4)?, &EngineOptions::default()).map_err(err)?;
        monotone(f, &report)?;
    }
    let mut runner = TestRunner::deterministic();
    let conjugator = (-40i128..40, -40i128..40, -40i128..40);
    let base = build_chain(&FamilyDescriptor::HeisenbergStable { pi_f: vec![FinitePrime { q: 2, n: 2, r: 1 }], pi_infty: vec![3] }, 1)
        .map_err(err)?;
    let opts = EngineOptions::default().with_cap(2);
    let plain = level_invariants(&base, 1, &opts).map_err(err)?;
    for _ in 0..50 {
        let (a, b, c) = conjugator.new_tree(&mut runner).expect("strategy").current();
        let conj = level_invariants(&base.conjugated(heis(a, b, c)), 1, &opts).map_err(err)?;
        ensure(
            (plain.m, plain.n, plain.k, plain.k_star.value) == (conj.m, conj.n, conj.k, conj.k_star.value),
            format!("conjugation by ({a}, {b}, {c}) changes invariants"),
        )?;
    }
    let instances = small_parametric();
    let limit = 100_000;
    for h in &instances {
        let q = oracle_moduli(h).map_err(err)?;
        let image = image_in_quotient(h, &q, limit).map_err(err)?;
        let brute = brute_force_core_oracle(&image, limit).map_err(err)?;
        let closed = normal_core(&GroupDescriptor::Heisenberg, h, limit).map_err(err)?;
        ensure(image_in_quotient(&closed, &q, limit).map_err(err)? == brute, format!("core mismatch for {h:?}"))?;
        let split: u128 = sylow_decompose(&q)
            .map_err(err)?
            .iter()
            .map(|(_, f)| image_order(h, f, limit))
            .product::<steinitz::Result<u128>>()
            .map_err(err)?;
        ensure(split == image_order(h, &q, limit).map_err(err)?, format!("Sylow recombination fails for {h:?}"))?;
    }
    Ok(format!("1000 lcm/mul triples, {} families to depth 4, 50 conjugators, {} core instances", grid.len(), instances.len()))
}

fn negative_controls() -> Outcome {
    let spec = build_chain(&FamilyDescriptor::HeisenbergSelfEmbed { p: 2 }, 2).map_err(err)?;
    let report = chain_report(&spec, &EngineOptions::default().with_backend(Backend::ClosedForm)).map_err(err)?;
    ensure(steinitz::chain::lagrange_check(&report), "clean report fails lagrange_check")?;
    let mut corrupted = report.clone();
    corrupted.levels[1].k *= 2;
    ensure(!steinitz::chain::lagrange_check(&corrupted), "corrupted k passes lagrange_check")?;
    let mut corrupted = report;
    corrupted.steinitz_g = corrupted.steinitz_g.mul(&SteinitzNumber::from_u128(3).map_err(err)?).map_err(err)?;
    ensure(!steinitz::chain::lagrange_check(&corrupted), "corrupted Pi[G] passes lagrange_check")?;

    let grid = family_grid();
    let opts = ClassifyOptions { limit: 20_000, ..ClassifyOptions::default() };
    for f in &grid {
        let c = classify_stability(&family_spec(f, 4)?, &opts).map_err(|e| format!("{f:?}: {e}"))?;
        ensure(!(c.certificate.is_some() && c.witness.is_some()), format!("certificate and witness for {f:?}"))?;
        let expected = expected_classification(f).stable;
        let clash = matches!((c.verdict, expected), (Verdict::Stable, Truth::False) | (Verdict::Wild, Truth::True));
        ensure(!clash, format!("verdict {:?} against expected {expected:?} for {f:?}", c.verdict))?;
    }
    Ok(format!("corrupted reports rejected; {} families without contradictory verdicts", grid.len()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("self-embedding golden values", selfembed_golden, Duration::from_secs(5)),
        ("toy-model orders", toy_orders, Duration::from_secs(10)),
        ("wildness witness", wild_witness, Duration::from_secs(30)),
        ("stability certificates", stability_certificates, Duration::from_secs(60)),
        ("1-d solenoid decisions", solenoid_decisions, Duration::from_secs(60)),
        ("property suites", property_suites, Duration::from_secs(180)),
        ("negative controls", negative_controls, Duration::from_secs(180)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {} {name} ({elapsed:.2?}): {reason}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
