use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn multipoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multipoly")).args(args).env("MULTIPOLY_THREADS", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const XY: &str = r#"{"field":"real","multidegree":[1,1],"dims":[1,1],"terms":[{"alphas":[[{"i":0,"e":1}],[{"i":0,"e":1}]],"re":1.0,"im":0.0}]}"#;
const SQUARE_OF_SUM: &str = r#"{"field":"real","multidegree":[2],"dims":[2],"terms":[{"alphas":[[{"i":0,"e":1},{"i":1,"e":1}]],"re":2.0,"im":0.0},{"alphas":[[{"i":0,"e":2}]],"re":1.0,"im":0.0},{"alphas":[[{"i":1,"e":2}]],"re":1.0,"im":0.0}]}"#;

#[test]
fn norm_of_bilinear_monomial() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "p.json", XY);
    let out = multipoly(&["norm", "--in", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["lower"], 1.0);
    assert_eq!(v["upper"], 1.0);
    assert_eq!(v["method"], "vertex_exact");
}

#[test]
fn polarize_and_back() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "p.json", SQUARE_OF_SUM);
    let form = multipoly(&["polarize", "--in", p.to_str().unwrap()]);
    assert_eq!(form.status.code(), Some(0));
    let f = write(dir.path(), "form.json", &stdout(&form));
    let back = multipoly(&["polarize", "--form", f.to_str().unwrap()]);
    assert_eq!(back.status.code(), Some(0));
    assert_eq!(stdout(&back).trim(), SQUARE_OF_SUM);

    let bounds = multipoly(&["polarize", "--in", p.to_str().unwrap(), "--bounds"]);
    assert_eq!(bounds.status.code(), Some(0));
}

#[test]
fn compose_check_passes_on_identity_maps() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "p.json", &format!(r#"{{"components":[{XY}]}}"#));
    let id = r#"{"rows":1,"cols":1,"entries":[[1.0]]}"#;
    let t = write(dir.path(), "t.json", id);
    let u = write(dir.path(), "u.json", id);
    let u_list = format!("{},{}", u.display(), u.display());
    let out = multipoly(&["compose-check", "--t", t.to_str().unwrap(), "--P", p.to_str().unwrap(), "--u", &u_list]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn scan_output_is_reproducible() {
    let args = ["bh-scan", "--n", "1,1", "--p", "1,1.3333333333333333", "--r", "2,4", "--seeds", "2", "--seed", "3"];
    let a = multipoly(&args);
    let b = multipoly(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("n,p,r,seed,"), "{text}");
}

#[test]
fn ksz_lift_is_printed_as_a_polynomial() {
    let out = multipoly(&["ksz", "--r", "2", "--M", "2", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["multidegree"], serde_json::json!([2]));
    assert_eq!(v["terms"].as_array().unwrap().len(), 4);
}

#[test]
fn bad_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"field":"real","multidegree":[0],"dims":[1],"terms":[]}"#);
    let out = multipoly(&["norm", "--in", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));

    let missing = dir.path().join("missing.json");
    assert_eq!(multipoly(&["norm", "--in", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(multipoly(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn output_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "p.json", SQUARE_OF_SUM);
    let target = dir.path().join("out.json");
    let direct = multipoly(&["norm", "--in", p.to_str().unwrap()]);
    let to_file = multipoly(&["norm", "--in", p.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    assert_eq!(std::fs::read(&target).unwrap(), direct.stdout);
}
