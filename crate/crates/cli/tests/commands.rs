use std::path::PathBuf;

use serde_json::Value;
use wconorm_cli::{run_command, CliError};

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut full = vec!["wconorm"];
    full.extend_from_slice(args);
    let code = run_command(full, &mut out).unwrap();
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn verify_all_on_running_scenario() {
    let (code, out) = run(&["verify", "--scenario", &scenario("z2_running.json"), "--all"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 8);
    assert!(reports.iter().all(|r| r["verdict"] == "pass"));
    // every measured number names its source
    for r in reports {
        for m in r["measured"].as_array().unwrap() {
            assert!(!m["source"].as_str().unwrap().is_empty());
        }
    }
}

#[test]
fn norm_on_running_scenario() {
    let (code, out) = run(&["norm", "--scenario", &scenario("z2_running.json"), "--p", "1,2,inf"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let norms = v["norms"].as_array().unwrap();
    let values: Vec<f64> = norms.iter().map(|n| n["bounds"]["lower"].as_f64().unwrap()).collect();
    let sigma = ((15.0 + 221f64.sqrt()) / 2.0).sqrt();
    assert_eq!(values[0], 5.0);
    assert!((values[1] - sigma).abs() < 1e-12);
    assert_eq!(values[2], 4.0);
    assert_eq!(norms[0]["bounds"]["lower_method"], "column-sum");
    assert_eq!(norms[2]["bounds"]["upper_method"], "row-sum");
}

#[test]
fn norm_csv_format() {
    let (_, out) = run(&["norm", "--scenario", &scenario("z2_running.json"), "--p", "inf", "--format", "csv"]);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "p,lower,upper,lower_method,upper_method,exact");
    assert_eq!(lines[1], "inf,4,4,row-sum,row-sum,true");
}

#[test]
fn demo_marks_the_counterexample() {
    let (code, out) = run(&["demo"]);
    assert_eq!(code, 0);
    assert!(out.contains("expected failure: property (*)"));
    assert!(out.lines().last().unwrap().ends_with("ok"));
}

#[test]
fn counterexample_verify_exits_zero() {
    let (code, out) = run(&["verify", "--scenario", &scenario("z2_trivial_counterexample.json"), "--checks", "property-star"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["verdict"], "expected-failure");
    assert_eq!(v[0]["hypotheses"]["witness"], serde_json::json!([1, 0]));
}

#[test]
fn non_abelian_character_check_is_skipped() {
    let (code, out) = run(&["verify", "--scenario", &scenario("s3_translation_d2.json"), "--checks", "character-invariance"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["check"], "character-invariance");
    assert!(v[0]["reason"].as_str().unwrap().contains("abelian"));
}

#[test]
fn twist_and_adjoint() {
    let (_, out) = run(&["twist", "--scenario", &scenario("z2_running.json")]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["character"], serde_json::json!(["0", "1/2"]));
    assert_eq!(v[1]["element"][1]["coeff"][0][0][0][0], -3.0);
    let (_, out) = run(&["adjoint", "--scenario", &scenario("z2_running.json")]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["matrix"][0][1], serde_json::json!([1.0, 0.0]));
    assert_eq!(v["matrix"][1][0], serde_json::json!([3.0, 0.0]));
}

#[test]
fn unsupported_p_for_inequality_checkers() {
    let mut out = Vec::new();
    let err = run_command(
        ["wconorm", "verify", "--scenario", &scenario("z2_running.json"), "--p", "3", "--checks", "property-star"],
        &mut out,
    )
    .unwrap_err();
    assert!(err.to_string().contains("not supported"), "{err}");
    let (code, _) = run(&["verify", "--scenario", &scenario("z2_running.json"), "--p", "3", "--checks", "interpolation"]);
    assert_eq!(code, 0);
}

#[test]
fn unknown_command() {
    let mut out = Vec::new();
    assert!(matches!(run_command(["wconorm", "frobnicate"], &mut out), Err(CliError::Usage(_))));
}

#[test]
fn batch_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let (code, _) = run(&[
            "batch", "--count", "4", "--group", "cyclic:2", "--points", "4", "--dim", "2", "--seed", "9", "--out",
            d.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let ja = std::fs::read(a.join("batch.json")).unwrap();
    assert_eq!(ja, std::fs::read(b.join("batch.json")).unwrap());
    let csv = std::fs::read_to_string(a.join("batch.csv")).unwrap();
    assert!(csv.starts_with("scenario,label,claim,p,discrepancy,tolerance,passed,verdict\n"));
    assert!(a.join("scenario-0003.json").exists());
    let (code, seq) = run(&["batch", "--count", "4", "--group", "cyclic:2", "--points", "4", "--dim", "2", "--seed", "9", "--sequential"]);
    assert_eq!(code, 0);
    assert_eq!(seq.as_bytes(), ja.as_slice());
}

#[test]
fn infeasible_batch_is_an_error() {
    let mut out = Vec::new();
    let err = run_command(["wconorm", "batch", "--group", "cyclic:3", "--points", "4"], &mut out).unwrap_err();
    assert!(err.to_string().contains("no free action"));
}

#[test]
fn corrupted_scenarios_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"label": "x", "seed": 1, "group": "cyclic:3",
            "space": {"points": 3, "weights": ["1", "1", "1"], "action": [[0,1,2],[1,2,0],[1,2,0]]},
            "element": []}"#,
    )
    .unwrap();
    let mut out = Vec::new();
    let err = run_command(["wconorm", "norm", "--scenario", path.to_str().unwrap()], &mut out).unwrap_err();
    assert!(err.to_string().contains("(g, h)"), "{err}");
    std::fs::write(&path, "{\"label\": ").unwrap();
    let err = run_command(["wconorm", "norm", "--scenario", path.to_str().unwrap()], &mut out).unwrap_err();
    assert!(err.to_string().contains("line 1"), "{err}");
    let err = run_command(["wconorm", "norm", "--scenario", "/nonexistent.json"], &mut out).unwrap_err();
    assert!(err.to_string().starts_with("io error"), "{err}");
}
