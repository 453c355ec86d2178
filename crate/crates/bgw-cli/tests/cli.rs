//! End-to-end tests of the `bgw` binary: record contents, exit codes, and the
//! JSON round-trip guarantee.

use std::process::{Command, Output};

fn bgw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bgw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

#[test]
fn correlator_norbury_value() {
    let out = bgw(&["correlator", "--ells", "1,1", "--normalization", "norbury"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"]["value"], "63/512");
    assert_eq!(v["normalization"], "norbury");
    assert_eq!(v["key"], serde_json::json!([1, 1]));
}

#[test]
fn correlator_nu_polynomial_sorted_by_degree() {
    let out = bgw(&[
        "correlator",
        "--ells",
        "1,2",
        "--normalization",
        "nu",
        "--symbolic",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"]["type"], "nu_poly");
    assert_eq!(
        v["value"]["value"],
        serde_json::json!([[0, "115/1536"], [2, "-1/128"]])
    );
}

#[test]
fn correlator_connected_at_half_vanishes() {
    let out = bgw(&[
        "correlator",
        "--ells",
        "0",
        "--normalization",
        "connected",
        "--nu",
        "1/2",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"]["value"], "0");
}

#[test]
fn json_round_trip_matches_library() {
    let out = bgw(&["correlator", "--ells", "1,1", "--normalization", "nu"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let pairs = v["value"]["value"].as_array().unwrap();
    let parsed = bgw_core::nupoly::NuPoly::from_coeffs(pairs.iter().map(|pair| {
        (
            pair[0].as_u64().unwrap() as u32,
            bgw_core::rational::parse_rat(pair[1].as_str().unwrap()).unwrap(),
        )
    }));
    let key = bgw_core::correlators::CorrelatorKey::new(vec![1, 1]).unwrap();
    let direct =
        bgw_core::correlators::nu_correlator(&key, &bgw_core::correlators::EngineConfig::default())
            .unwrap();
    assert_eq!(parsed, direct);
}

#[test]
fn table_diff_matches_snapshot() {
    let out = bgw(&["table", "a2", "--max", "2", "--diff"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["all_match"], serde_json::json!(true));
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn table_diff_beyond_snapshot_fails_with_verification_exit() {
    // indices above the snapshot coverage cannot be verified
    let out = bgw(&["table", "a3", "--max", "4", "--diff"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let out = bgw(&["correlator", "--normalization", "norbury"]);
    assert_eq!(out.status.code(), Some(2), "missing --ells");
    let out = bgw(&["correlator", "--ells", "1", "--nu", "bogus"]);
    assert_eq!(out.status.code(), Some(2), "unparsable nu");
    let out = bgw(&[
        "correlator",
        "--ells",
        "1",
        "--normalization",
        "norbury",
        "--nu",
        "1/2",
    ]);
    assert_eq!(out.status.code(), Some(2), "norbury away from nu = 0");
}

#[test]
fn tau_emits_displayed_coefficients() {
    let out = bgw(&["tau", "--level", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let coeffs = v["coefficients"].as_array().unwrap();
    // t1 coefficient (1-4nu^2)(9-4nu^2)/1024 = 9/1024 - 40/1024 nu^2 + 16/1024 nu^4
    let t1 = coeffs
        .iter()
        .find(|c| c["monomial"] == serde_json::json!([[1, 1]]))
        .expect("t1 row");
    assert_eq!(
        t1["value"]["value"],
        serde_json::json!([[0, "9/1024"], [2, "-5/128"], [4, "1/64"]])
    );
}

#[test]
fn verify_suites_pass() {
    for (suite, extra) in [
        ("tricomi", vec!["--max-g", "4"]),
        ("umatrix", vec!["--order", "8"]),
        ("miwa", vec!["--level", "3"]),
    ] {
        let mut args = vec!["verify", "--suite", suite];
        args.extend(extra);
        let out = bgw(&args);
        assert!(out.status.success(), "suite {} failed", suite);
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["pass"], serde_json::json!(true), "suite {}", suite);
    }
}

#[test]
fn out_flag_writes_identical_bytes() {
    let dir = std::env::temp_dir().join("bgw-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("corr.json");
    let to_stdout = bgw(&["correlator", "--ells", "1", "--normalization", "norbury"]);
    let to_file = bgw(&[
        "correlator",
        "--ells",
        "1",
        "--normalization",
        "norbury",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    let file_bytes = std::fs::read_to_string(&path).unwrap();
    assert_eq!(file_bytes, stdout(&to_stdout));
}
