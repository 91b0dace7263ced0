use std::io::Write as _;
use std::process::Command;

use hypershadow::cli::run;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hypershadow").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = call(args);
    assert!(err.is_empty(), "{args:?}: {err}");
    (code, serde_json::from_str(&out).unwrap())
}

#[test]
fn documented_examples() {
    let (code, v) = report(&["polygon", "verify", "--regular-ideal", "3", "--point", "0", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "PASS");
    assert!((v["report"]["total"].as_f64().unwrap() / 2.0 - std::f64::consts::PI).abs() < 1e-9);

    let (code, v) = report(&["polytope", "verify", "--builtin", "ideal-octahedron", "--point", "0", "0", "0"]);
    assert_eq!(code, 0);
    let norm = v["report"]["normalized"].as_f64().unwrap();
    assert!((norm - 8.0 / (3.0 + 3f64.sqrt())).abs() < 1e-9 && norm > 1.0 && norm < 2.0);

    let (code, v) = report(&["specfun", "beta", "--x", "1", "--k", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["value"].as_f64().unwrap(), 2.0);
}

#[test]
fn exit_codes_follow_status() {
    let corpus: &[&[&str]] = &[
        &["polygon", "verify", "--regular-ideal", "6", "--point", "0.2", "-0.3"],
        &["polygon", "verify", "--builtin", "compact-square"],
        &["polygon", "verify", "--builtin", "truncated-triangle"],
        &["polytope", "verify", "--builtin", "tiny-cube"],
        &["polytope", "skeleton", "--builtin", "ideal-octahedron"],
        &["polytope", "radius-bound", "--faces", "100"],
        &["polytope", "radius-bound", "--vertices", "12"],
        &["klein", "parallelism", "--d", "1.5"],
        &["klein", "dist", "--p", "0.1", "0.2", "--q", "-0.3", "0.4"],
        &["ortho", "series", "--builtin", "three-mirror"],
        &["poincare", "build"],
        &["poincare", "cover", "--radius", "6"],
        &["--tolerance", "1e-13", "polytope", "verify", "--builtin", "ideal-octahedron"],
    ];
    for args in corpus {
        let (code, v) = report(args);
        let expected = match v["status"].as_str().unwrap() {
            "PASS" | "COMPUTED" => 0,
            "FAIL" => 1,
            other => panic!("unknown status {other}"),
        };
        assert_eq!(code, expected, "{args:?}");
    }
}

#[test]
fn input_errors_give_one_line_and_code_two() {
    let cases: &[&[&str]] = &[
        &["specfun", "beta", "--x", "1.5", "--k", "2"],
        &["klein", "dist", "--p", "1.2", "0", "--q", "0", "0"],
        &["poincare", "series", "--r-max", "20"],
        &["ortho", "series", "--builtin", "two-mirror"],
        &["--tolerance", "1e-3", "specfun", "beta", "--x", "0.5", "--k", "2"],
        &["--format", "csv", "specfun", "beta", "--x", "0.5", "--k", "2"],
    ];
    for args in cases {
        let (code, out, err) = call(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty());
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
    assert_eq!(call(&["polytope", "frobnicate"]).0, 2);
}

#[test]
fn json_inputs() {
    let mut sides = tempfile::NamedTempFile::new().unwrap();
    write!(
        sides,
        r#"{{"sides": [{{"normal": [1, 0], "offset": 0.5}}, {{"normal": [0, 1], "offset": 0.5}},
                      {{"normal": [-1, 0], "offset": 0.5}}, {{"normal": [0, -1], "offset": 0.5}}]}}"#
    )
    .unwrap();
    let path = sides.path().to_str().unwrap();
    let (code, v) = report(&["polygon", "verify", "--input", path]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["vertices"].as_array().unwrap().len(), 4);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, "{{\"sides\": [").unwrap();
    let (code, _, err) = call(&["polygon", "verify", "--input", bad.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("malformed JSON"));
}

#[test]
fn series_csv_layout() {
    let (code, out, _) = call(&["--format", "csv", "poincare", "series", "--r-max", "3", "--step", "1"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "R,orbit_count,partial_sum_s1,partial_sum_s2");
    assert_eq!(lines.len(), 4);
}

#[test]
fn output_is_deterministic() {
    let args = ["chimney", "mc", "--d", "1", "--g", "basmajian", "--samples", "20000", "--rotated"];
    let (_, a, _) = call(&args);
    let (_, b, _) = call(&args);
    assert_eq!(a, b);
}

#[test]
fn seed_comes_from_flag_then_environment() {
    let bin = env!("CARGO_BIN_EXE_hypershadow");
    let seed_of = |extra: &[&str], env: Option<&str>| -> u64 {
        let mut cmd = Command::new(bin);
        cmd.args(["chimney", "mc", "--d", "1", "--samples", "1000"]).args(extra);
        cmd.env_remove("HYPERSHADOW_SEED");
        if let Some(s) = env {
            cmd.env("HYPERSHADOW_SEED", s);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["report"]["estimate"]["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(&[], None), 42);
    assert_eq!(seed_of(&[], Some("9")), 9);
    assert_eq!(seed_of(&["--seed", "5"], Some("9")), 5);
    let out = Command::new(bin)
        .args(["chimney", "mc", "--d", "1", "--samples", "1000"])
        .env("HYPERSHADOW_SEED", "nine")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
