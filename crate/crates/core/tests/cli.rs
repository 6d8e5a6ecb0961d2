use std::path::PathBuf;

use serde_json::Value;
use steinitz::chain::ChainReport;
use steinitz::Error;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("steinitz").chain(args.iter().copied());
    let code = steinitz::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let (code, out, err) = run(&full);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("steinitz-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn selfembed_table() {
    let report: ChainReport =
        serde_json::from_value(json(&["chain-invariants", "--family", "heis-selfembed", "--p", "2", "--depth", "3"])).unwrap();
    let rows: Vec<_> = report.levels.iter().map(|l| (l.m, l.n, l.k, l.k_star.value)).collect();
    assert_eq!(rows, vec![(16, 64, 4, 1), (256, 4096, 16, 1), (4096, 262144, 64, 1)]);
    assert!(report.lagrange_ok && report.d_stabilized);

    let (code, text, _) = run(&["chain-invariants", "--family", "heis-selfembed", "--p", "2", "--depth", "2"]);
    assert_eq!(code, 0);
    assert!(text.contains("4096"));
}

#[test]
fn report_json_round_trips() {
    let v = json(&["chain-invariants", "--family", "heis-stable", "--pi-f", "2:2:1,3:2:1", "--pi-infty", "5", "--depth", "2"]);
    let report: ChainReport = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(serde_json::to_value(&report).unwrap(), v);
    assert!(report.levels.iter().all(|l| l.k_star.value == 6));
}

#[test]
fn oracle_verify_keeps_values() {
    let args = ["chain-invariants", "--family", "toy-model", "--p", "2", "--n", "2", "--k", "1", "--depth", "1"];
    let plain = json(&args);
    let mut verified_args = args.to_vec();
    verified_args.extend(["--oracle", "verify"]);
    let mut verified = json(&verified_args);
    let oracle = verified.as_object_mut().unwrap().remove("oracle").expect("verification stanza");
    assert_eq!(oracle[0]["status"], "verified");
    assert_eq!(verified, plain);
}

#[test]
fn params_pairs_match_flags() {
    let flags = json(&["chain-invariants", "--family", "toy-model", "--p", "3", "--n", "2", "--k", "1", "--depth", "1"]);
    let pairs = json(&["chain-invariants", "--family", "toy-model", "--params", "p=3;n=2;k=1", "--depth", "1"]);
    assert_eq!(flags, pairs);
}

#[test]
fn wild_witness_json() {
    let w = json(&["wild-witness", "--family", "heis-wild", "--primes", "2,3,5", "--n", "2", "--r", "1"]);
    assert_eq!((w["element"]["a"].as_i64(), w["element"]["b"].as_i64(), w["element"]["c"].as_i64()), (Some(14700), Some(0), Some(0)));
    assert_eq!((w["shallow_level"].as_u64(), w["deep_level"].as_u64()), (Some(1), Some(2)));
    assert!(!w["transcript"].as_array().unwrap().is_empty());
}

#[test]
fn classify_verdicts() {
    let stable = json(&["classify", "--family", "heis-stable", "--pi-f", "2:2:1,3:2:1", "--pi-infty", "5"]);
    assert_eq!(stable["verdict"], "stable");
    let wild = json(&["classify", "--family", "heis-wild", "--primes", "2,3,5", "--n", "2", "--r", "1", "--depth", "2"]);
    assert_eq!(wild["verdict"], "wild");
    let toral = json(&["classify", "--family", "toral-diagonal", "--pi-infty", "2"]);
    assert_eq!(toral["verdict"], "stable");
}

#[test]
fn solenoid_compare_files() {
    let dyadic = temp_file("dyadic.json", r#"{"degrees": [], "tail": {"periodic": [2]}}"#);
    let quaternary = temp_file("quaternary.json", r#"{"degrees": [3], "tail": {"periodic": [4]}}"#);
    let mixed = temp_file("mixed.json", r#"{"degrees": [], "tail": {"periodic": [2, 3]}}"#);
    let (code, text, err) = run(&["solenoid-compare", dyadic.to_str().unwrap(), quaternary.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(text.ends_with("asymptotically equivalent: true; homeomorphic (1-d): true\n"), "{text}");
    let v = json(&["solenoid-compare", dyadic.to_str().unwrap(), mixed.to_str().unwrap()]);
    assert_eq!((v["asymptotically_equivalent"].as_str(), v["homeomorphic"].as_str()), (Some("false"), Some("false")));
}

#[test]
fn spectra_of_a_number() {
    let v = json(&["spectra", "2^inf * 3"]);
    assert_eq!(v[0]["label"], "Pi");
    let (code, text, _) = run(&["spectra", "2^inf * 3"]);
    assert_eq!(code, 0);
    assert!(text.contains("pi_infty"));
}

#[test]
fn family_list_marks_unsupported() {
    let rows = json(&["family-list"]);
    let unsupported: Vec<_> =
        rows.as_array().unwrap().iter().filter(|r| r["supported"] == false).map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(unsupported, vec!["permutation-extension"]);
}

#[test]
fn input_errors_exit_2() {
    for args in [
        vec!["chain-invariants", "--family", "no-such-family"],
        vec!["chain-invariants", "--family", "heis-selfembed"],
        vec!["chain-invariants", "--family", "heis-selfembed", "--p", "4"],
        vec!["solenoid-compare", "/nonexistent/a.json", "/nonexistent/b.json"],
        vec!["no-such-command"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 2, "{args:?}");
        let e: Value = serde_json::from_str(err.trim()).unwrap();
        assert!(e["error"].is_string() && e["message"].is_string());
    }
}

#[test]
fn resource_bound_exits_3() {
    let args = ["--limit", "10", "chain-invariants", "--family", "toy-model", "--p", "3", "--n", "2", "--k", "1", "--backend", "brute-force"];
    let (code, _, err) = run(&args);
    assert_eq!(code, 3);
    let e: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(e["error"], "resource-bound");
}

#[test]
fn invariant_violations_map_to_4() {
    let e = Error::InvariantViolation("Lagrange identity n = m·k fails".into());
    assert_eq!(e.exit_code(), 4);
    assert_eq!(e.to_json()["error"], "invariant-violation");
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
}
