use std::fs;
use std::process::Command;

use serde_json::Value;

fn lensrr(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_lensrr")).args(args).output().expect("binary runs");
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().expect("exit code"),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

#[test]
fn constant_prints_shortest_round_trip() {
    let (out, _, code) = lensrr(&["constant", "--class", "bmo", "--n", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), r#"{"constant":1.0606601717798212}"#);
    let (out, _, code) = lensrr(&["constant", "--class", "a2", "--n", "1", "--Q", "2"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["constant"], 2.125);
    let (out, _, _) = lensrr(&["constant", "--class", "bmo", "--alpha", "0.25"]);
    assert_eq!(json(&out)["constant"], 1.25);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["constant", "--class", "bmo"][..],
        &["constant", "--class", "bmo", "--n", "1", "--alpha", "0.5"],
        &["constant", "--class", "a2", "--n", "1"],
        &["constant", "--class", "ap", "--p1", "1", "--p2", "0.5", "--Q", "4", "--alpha", "0.5"],
        &["extend", "--lens", "power", "--C", "2", "--q", "1", "--alpha", "0.5"],
        &["extend", "--lens", "parabolic", "--eps", "1", "--alpha", "1.5"],
        &["witness", "--class", "ap", "--n", "1"],
        &["frobnicate"],
    ] {
        let (out, err, code) = lensrr(args);
        assert_eq!(code, 2, "{args:?}: {out} {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn extend_reports_both_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("env.csv");
    let svg = dir.path().join("env.svg");
    let (out, _, code) = lensrr(&[
        "extend", "--lens", "parabolic", "--eps", "1", "--alpha", "0.5", "--check",
        "--csv", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["extension"], "bounded");
    assert_eq!(v["check"]["pass"], true);
    assert!((v["constant"].as_f64().unwrap() - 1.5 / 2f64.sqrt()).abs() < 1e-15);
    assert!(fs::read_to_string(&csv).unwrap().starts_with("x1,x2\n"));
    let plot = fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg") && plot.trim_end().ends_with("</svg>"));

    let (out, _, code) = lensrr(&["extend", "--lens", "power", "--C", "2", "--q", "2", "--alpha", "0.4", "--check"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["extension"], "epigraph");
    assert_eq!(v["constant"], Value::Null);
    assert!((v["threshold"].as_f64().unwrap() - 0.5).abs() < 1e-15);

    let (out, _, _) = lensrr(&["extend", "--lens", "power", "--C", "2", "--q", "-1", "--alpha", "0.5"]);
    assert!((json(&out)["constant"].as_f64().unwrap() - 2.125).abs() < 1e-12);
}

#[test]
fn witness_round_trips_through_rearrange() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("w.json");
    let (out, _, code) = lensrr(&["witness", "--class", "a2", "--n", "2", "--Q", "3", "--output", report.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!((json(&out)["ratio"].as_f64().unwrap() - 4.125).abs() < 1e-6);

    let (out, _, code) = lensrr(&["witness", "--class", "bmo", "--n", "1", "--output", report.to_str().unwrap()]);
    assert_eq!(code, 0);
    let target = json(&out)["target"].as_f64().unwrap();
    let rearranged = dir.path().join("g.json");
    let (out, _, code) = lensrr(&["rearrange", "--input", report.to_str().unwrap(), "--output", rearranged.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["ratio"].as_f64().unwrap() - target).abs() < 1e-6);
    let g = json(&fs::read_to_string(&rearranged).unwrap());
    let vals: Vec<f64> = g["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn rearrange_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"n":1,"depth":2,"values":[1,3,2"#).unwrap();
    assert_eq!(lensrr(&["rearrange", "--input", bad.to_str().unwrap()]).2, 2);
    fs::write(&bad, r#"{"n":1,"depth":2,"values":[1,3,2]}"#).unwrap();
    assert_eq!(lensrr(&["rearrange", "--input", bad.to_str().unwrap()]).2, 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(lensrr(&["rearrange", "--input", missing.to_str().unwrap()]).2, 2);

    let good = dir.path().join("f.json");
    fs::write(&good, r#"{"n":1,"depth":2,"values":[1,3,2,0]}"#).unwrap();
    let (out, _, code) = lensrr(&["rearrange", "--input", good.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["rearranged"]["values"], serde_json::json!([3.0, 2.0, 1.0, 0.0]));
    // variance of {0,1,2,3}
    assert!((v["continuous"].as_f64().unwrap() - 1.25f64.sqrt()).abs() < 1e-12);
}

#[test]
fn verify_geometry_passes() {
    let (out, _, code) = lensrr(&["verify", "--suite", "geometry", "--seed", "7"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().filter(|l| l.starts_with("geometry/")).all(|l| l.contains("PASS")));
}

#[test]
fn help_exits_zero() {
    let (out, _, code) = lensrr(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify"));
}
