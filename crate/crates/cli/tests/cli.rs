use std::process::Command;

use serde_json::Value;

fn homog(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_homog")).args(args).output().expect("binary runs");
    (out.status.code(), String::from_utf8(out.stdout).expect("utf-8"))
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(homog(&["verify-all", "--no-such-flag"]).0, Some(64));
    assert_eq!(homog(&["no-such-command"]).0, Some(64));
    assert_eq!(homog(&["pinch", "--monoid", "q_unit_trunc", "--eps", "3/2"]).0, Some(64));
}

#[test]
fn broken_ominus_is_caught_with_a_witness() {
    let (code, out) = homog(&["verify-all", "--only", "1", "--inject-fault", "ominus"]);
    assert_eq!(code, Some(1));
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["version"], "v1");
    assert_eq!(r["checks"][0]["status"], "violation");
    assert!(r["checks"][0]["witness"].is_object());
}

#[test]
fn affine_fixture_exits_with_a_violation() {
    let (code, out) = homog(&["indep", "axioms", "--kind", "affine_fq", "--q", "2", "--samples", "300"]);
    assert_eq!(code, Some(1));
    let r: Value = serde_json::from_str(&out).unwrap();
    let bm = r["checks"].as_array().unwrap().iter().find(|c| c["name"].as_str().unwrap().ends_with("base_monotonicity")).unwrap();
    assert_eq!(bm["status"], "violation");
}

#[test]
fn acl_uses_coordinate_syntax() {
    let (code, out) = homog(&["oligo", "acl", "--kind", "vec_fq", "--q", "2", "--set", "e1,e1+e2"]);
    assert_eq!(code, Some(0));
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["acl"], serde_json::json!(["0", "e1", "e2", "e1+e2"]));
}

#[test]
fn gen_is_reproducible_and_pinch_writes_both_maps() {
    let a = homog(&["gen", "--monoid", "q_lex2", "--steps", "40"]);
    assert_eq!(a, homog(&["gen", "--monoid", "q_lex2", "--steps", "40"]));
    let r: Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(r["cursor"], 40);

    let (code, out) = homog(&["pinch", "--monoid", "q_nonneg", "--eps", "1", "--advances", "10"]);
    assert_eq!(code, Some(0));
    let r: Value = serde_json::from_str(&out).unwrap();
    assert!(r["phi"]["pairs"].as_array().unwrap().len() >= 10);
    assert!(r["psi"]["rule"].is_string());
}

#[test]
fn reach_reads_a_chain_file() {
    let dir = std::env::temp_dir().join(format!("homog-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("chain.json");
    std::fs::write(&path, r#"{"tuples": [["e1","e2"],["e1","e3"]]}"#).unwrap();
    let (code, out) = homog(&["chains", "reach", "--kind", "vec_fq", "--q", "2", "--size", "5", "--chain", path.to_str().unwrap(), "--samples", "5"]);
    assert_eq!(code, Some(0), "{out}");
    std::fs::remove_dir_all(&dir).ok();
}
