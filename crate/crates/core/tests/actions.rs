use steinitz::chain::ChainSpec;
use steinitz::dynamics::{
    classify_stability, topological_freeness_probe, verify_witness, wild_witness_search, ClassifyOptions, Verdict,
};
use steinitz::families::{build_chain, FamilyDescriptor, FinitePrime, ToralParams};
use steinitz::solenoid::{presentation_to_chain, DegreeTail, Presentation};
use steinitz::{Error, Truth};

const LIMIT: u128 = 100_000;

fn chain(f: FamilyDescriptor, depth: usize) -> ChainSpec {
    build_chain(&f, depth).unwrap()
}

fn wild_235() -> FamilyDescriptor {
    FamilyDescriptor::HeisenbergWild {
        prefix: [2, 3, 5].iter().map(|&q| FinitePrime { q, n: 2, r: 1 }).collect(),
        n: 2,
        r: 1,
        pi_infty: vec![],
    }
}

#[test]
fn stable_chain_has_no_shallow_kernel() {
    let f = FamilyDescriptor::HeisenbergStable { pi_f: vec![FinitePrime { q: 2, n: 2, r: 1 }], pi_infty: vec![3] };
    let spec = chain(f, 4);
    assert_eq!(wild_witness_search(&spec, 2, 4, LIMIT).unwrap(), None);
    let c = classify_stability(&spec, &ClassifyOptions::default()).unwrap();
    assert_eq!(c.verdict, Verdict::Stable);
    assert!(c.witness.is_none());
}

#[test]
fn abelian_actions_skip_the_search() {
    let spec = chain(FamilyDescriptor::ToralDiagonal(ToralParams { pi_f: vec![(3, 2)], pi_infty: vec![2] }), 3);
    let c = classify_stability(&spec, &ClassifyOptions::default()).unwrap();
    assert_eq!(c.verdict, Verdict::Stable);
    assert!(c.search.starts_with("none: abelian"));
}

#[test]
fn tampered_witness_is_rejected() {
    let spec = chain(wild_235(), 2);
    let mut w = wild_witness_search(&spec, 1, 2, LIMIT).unwrap().unwrap();
    assert_eq!(verify_witness(&spec, &w, LIMIT).unwrap(), w);
    w.element.b += 1;
    assert!(matches!(verify_witness(&spec, &w, LIMIT), Err(Error::InvariantViolation(_))));
}

#[test]
fn wild_classification_reports_the_witness() {
    let c = classify_stability(&chain(wild_235(), 2), &ClassifyOptions::default()).unwrap();
    assert_eq!(c.verdict, Verdict::Wild);
    assert!(c.certificate.is_none());
    assert!(c.reason.contains("(14700, 0, 0)"));
}

#[test]
fn freeness_probe_on_finite_and_infinite_chains() {
    // x^4 lies in the core of the toy model, so it only looks like a fixed
    // cylinder because the action is finite
    let toy = chain(FamilyDescriptor::ToyModel { p: 2, n: 2, k: 1 }, 1);
    let report = topological_freeness_probe(&toy, 4, 1, LIMIT).unwrap();
    assert!(report.certificates.is_empty());
    assert!(report.truncation_artifacts.iter().any(|h| h.element == steinitz::chain::heis(4, 0, 0)));

    let selfembed = chain(FamilyDescriptor::HeisenbergSelfEmbed { p: 2 }, 2);
    let report = topological_freeness_probe(&selfembed, 2, 2, LIMIT).unwrap();
    assert!(report.certificates.is_empty());
}

#[test]
fn presentations_match_their_chains() {
    let selfembed = chain(FamilyDescriptor::HeisenbergSelfEmbed { p: 2 }, 3);
    let check = presentation_to_chain(&Presentation::periodic(vec![16]).unwrap(), &selfembed, LIMIT).unwrap();
    assert_eq!(check.indices, vec![16, 256, 4096]);
    assert_eq!(check.prediction_matches, Truth::True);

    let dyadic = chain(FamilyDescriptor::ToralDiagonal(ToralParams { pi_f: vec![], pi_infty: vec![2] }), 4);
    let check = presentation_to_chain(&Presentation::periodic(vec![2]).unwrap(), &dyadic, LIMIT).unwrap();
    assert_eq!(check.levels_checked, 4);

    let shifted = Presentation::new(vec![4], Some(DegreeTail::Periodic(vec![16])), 1).unwrap();
    assert!(matches!(presentation_to_chain(&shifted, &selfembed, LIMIT), Err(Error::MismatchAtLevel { level: 1, .. })));
}

#[test]
fn finite_prefix_kernel_does_not_contradict_stability() {
    // 5 enters with r < n at level 2; beyond it the discriminant stops growing
    let f = FamilyDescriptor::HeisenbergWild {
        prefix: vec![FinitePrime { q: 7, n: 1, r: 1 }, FinitePrime { q: 5, n: 2, r: 1 }],
        n: 1,
        r: 1,
        pi_infty: vec![],
    };
    let spec = chain(f, 4);
    assert!(wild_witness_search(&spec, 1, 2, LIMIT).unwrap().is_some());
    let c = classify_stability(&spec, &ClassifyOptions::default()).unwrap();
    assert_eq!(c.verdict, Verdict::Stable);
    assert!(c.witness.is_none());
}
