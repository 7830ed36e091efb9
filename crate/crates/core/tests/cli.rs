use std::process::Command;

use genlambda::minpoly::{verify_theorem1, BivarPoly};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_genlambda"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = bin().args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

#[test]
fn counts_reports_ell() {
    let (code, out, _) = run(&["counts", "--level", "5"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ell"], 4);
    assert_eq!(v["t"], 3);
}

#[test]
fn build_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f3.json");
    let cache = dir.path().join("cache");
    let p = path.to_str().unwrap();
    let c = cache.to_str().unwrap();
    let (code, _, _) = run(&["minpoly", "build", "--level", "3", "--out", p, "--cache", c]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(r#"{"N":3,"dN":12,"ellN":1,"tN":1,"P":["#));
    let (code, out, _) = run(&["minpoly", "verify", "--in", p]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);

    let mut loaded = BivarPoly::from_json(text.trim()).unwrap();
    let fresh = genlambda::minpoly::build_f(3, None).unwrap();
    loaded.prec = fresh.prec;
    let a = serde_json::to_value(verify_theorem1(&loaded).unwrap()).unwrap();
    assert_eq!(a, serde_json::to_value(verify_theorem1(&fresh).unwrap()).unwrap());
    assert_eq!(v["structure"], a);

    // A second build reuses the cache file and emits the same polynomial.
    let (code, again, _) = run(&["minpoly", "build", "--level", "3", "--cache", c]);
    assert_eq!(code, 0);
    let again: serde_json::Value = serde_json::from_str(&again).unwrap();
    assert_eq!(again, serde_json::from_str::<serde_json::Value>(&text).unwrap());
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
}

#[test]
fn corrupted_cache_is_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().to_str().unwrap();
    assert_eq!(run(&["minpoly", "build", "-N", "4", "--cache", c]).0, 0);
    let file = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    let good = std::fs::read_to_string(&file).unwrap();
    let bad = good.replacen("\"1\"", "\"2\"", 1);
    assert_ne!(bad, good);
    std::fs::write(&file, bad).unwrap();
    let (code, out, _) = run(&["minpoly", "build", "-N", "4", "--cache", c]);
    assert_eq!(code, 0);
    let out: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(out, serde_json::from_str::<serde_json::Value>(&good).unwrap());
}

#[test]
fn sums_sweep_passes() {
    assert_eq!(run(&["sums", "--max-M", "50", "--verify"]).0, 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["qexp", "--bogus"]).0, 2);
    assert_eq!(run(&["counts", "-N", "2"]).0, 2);
    assert_eq!(run(&["minpoly", "build", "-N", "4", "--prec", "5"]).0, 2);
    assert_eq!(run(&["qexp", "lambda", "--basis", "1,0,0"]).0, 2);
    assert_eq!(run(&["cm", "eval", "--tau", "0,-1"]).0, 2);
}

#[test]
fn level_six_warns() {
    let (code, _, err) = run(&["counts", "-N", "6"]);
    assert_eq!(code, 0);
    assert!(err.contains("N = 6"));
}

#[test]
fn qexp_forms() {
    let (code, out, _) = run(&["-N", "3", "qexp", "--prec", "4", "lambda", "--basis", "1,0,0,1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!((v["N"].as_i64(), v["ord"].as_i64(), v["prec"].as_i64()), (Some(3), Some(1), Some(4)));
    let (_, m, _) = run(&["-N", "3", "qexp", "--prec", "4", "lambda", "--matrix", "1,0,0,1"]);
    assert_eq!(m, out);
    for what in [&["e", "1", "0"][..], &["j"], &["g"], &["lambda-classical"]] {
        let mut args = vec!["-N", "4", "qexp", "--prec", "12"];
        args.extend_from_slice(what);
        assert_eq!(run(&args).0, 0, "{what:?}");
    }
    let (_, text, _) = run(&["-N", "4", "--format", "text", "qexp", "--prec", "3", "j"]);
    assert!(text.starts_with("N=4 ord=-4 prec=3"));
}

#[test]
fn cm_eval_and_verify() {
    let (code, out, _) = run(&["cm", "eval", "-N", "3", "--tau", "0,1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let (re, im) = (v["lambda"][0].as_f64().unwrap(), v["lambda"][1].as_f64().unwrap());
    assert!((re + 3f64.sqrt() / 2.0).abs() < 1e-10 && (im - 0.5).abs() < 1e-10);
    assert_eq!(run(&["cm", "verify", "-N", "5"]).0, 0);
    // The level-3 and level-4 tables include misprinted relations, which fail.
    assert_eq!(run(&["cm", "verify", "-N", "3"]).0, 1);
    assert_eq!(run(&["cm", "verify", "-N", "4"]).0, 1);
}

#[test]
fn cusps_json_shape() {
    let (code, out, _) = run(&["cusps", "-N", "5"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r["nu_orbit"].as_array().unwrap().len() == 5));
}

#[test]
fn output_is_independent_of_threads() {
    let (_, a, _) = run(&["minpoly", "build", "-N", "5", "--threads", "1"]);
    let (_, b, _) = run(&["minpoly", "build", "-N", "5", "--threads", "3"]);
    assert_eq!(a, b);
}
