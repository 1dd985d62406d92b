use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordwalk")).args(args).output().expect("binary runs")
}

/// Runs with `--json` and returns the exit code and the parsed report.
fn report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON from {args:?}: {e}\n{}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), v)
}

#[test]
fn walk_trace_example() {
    let (code, v) = report(&["walk", "trace", "--alpha", "3", "--beta", "w*2"]);
    assert_eq!(code, 0);
    assert_eq!(v["outcome"], "pass");
    assert_eq!(v["result"]["steps"], serde_json::json!(["w*2", "w", "3"]));
    let text = run(&["walk", "trace", "--alpha", "3", "--beta", "w*2"]);
    assert_eq!(String::from_utf8_lossy(&text.stdout).trim(), "w*2 -> w -> 3");
}

#[test]
fn walk_rho_values() {
    // rho_2 counts every ordinal on the trace, both ends included.
    for (kind, want) in [("1", "3"), ("2", "3"), ("3", "0")] {
        let (code, v) = report(&["walk", "rho", "--kind", kind, "--alpha", "3", "--beta", "w*2"]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["value"], want, "rho_{kind}");
    }
}

#[test]
fn incoherent_family_exits_one_with_tuple() {
    let (code, v) = report(&["coh", "check", "--in", &data("bad.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["outcome"], "fail");
    let w = &v["witnesses"][0];
    assert_eq!(w["tuple"], serde_json::json!(["w", "w*2"]));
}

#[test]
fn coherent_family_passes_mod_finite_only() {
    assert_eq!(run(&["coh", "check", "--in", &data("good.json")]).status.code(), Some(0));
    assert_eq!(run(&["coh", "check", "--mode", "exact", "--in", &data("good.json")]).status.code(), Some(1));
}

#[test]
fn discrete_cover_h0_is_free_of_rank_three() {
    let (code, v) = report(&["cech", "cohomology", "--in", &data("cover3.json"), "--degree", "0"]);
    assert_eq!(code, 0);
    let h = &v["result"]["cohomology"][0];
    assert_eq!(h["rank"], 3);
    assert_eq!(h["torsion"], serde_json::json!([]));
}

#[test]
fn circle_cover_has_h1() {
    let (code, v) = report(&["cech", "cohomology", "--in", &data("circle.json")]);
    assert_eq!(code, 0);
    let groups: Vec<&str> = v["result"]["cohomology"].as_array().unwrap().iter().map(|h| h["group"].as_str().unwrap()).collect();
    assert_eq!(groups[..3], ["Z", "Z", "0"]);
}

#[test]
fn refinement_of_connected_covers_is_iso_on_h0() {
    let (code, v) = report(&["cech", "refine", "--in", &data("refine.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["isomorphisms"][0], true);
    assert_eq!(v["result"]["induced"][0]["matrix"], serde_json::json!([["1"]]));
}

#[test]
fn les_is_exact_in_low_degrees() {
    for d in ["0", "1"] {
        let (code, v) = report(&["cech", "les", "--in", &data("les.json"), "--degree", d]);
        assert_eq!(code, 0, "degree {d}: {v}");
    }
}

#[test]
fn homotopy_identity_holds_for_finite_support_cochain() {
    let (code, v) = report(&["cech", "homotopy", "--in", &data("homotopy.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["tuples"].as_array().unwrap().len(), 3);
}

#[test]
fn input_errors_exit_three() {
    assert_eq!(run(&["walk", "trace", "--alpha", "x", "--beta", "w"]).status.code(), Some(3));
    assert_eq!(run(&["walk", "fly"]).status.code(), Some(3));
    assert_eq!(run(&["cech", "complex", "--in", "/nonexistent.json"]).status.code(), Some(3));
    let (code, v) = report(&["walk", "trace", "--alpha", "w*3", "--beta", "w"]);
    assert_eq!(code, 3);
    assert_eq!(v["outcome"], "error");
}

#[test]
fn spent_fuel_exits_two() {
    let (code, v) = report(&["walk", "profile", "--kind", "1", "--beta", "w^3", "--gamma", "w^3+w", "--fuel", "3"]);
    assert_eq!(code, 2);
    assert_eq!(v["outcome"], "unknown");
}

#[test]
fn flipped_face_fails_cochain_check_with_located_block() {
    let (code, v) = report(&["suite", "--check", "01-cochain-identity", "--flip-face", "1,0"]);
    assert_eq!(code, 1);
    let w = v["result"]["checks"][0]["witnesses"].to_string();
    assert!(w.contains("nonzero in block"), "{w}");
    assert_eq!(run(&["suite", "--check", "01-cochain-identity"]).status.code(), Some(0));
}

#[test]
fn same_arguments_give_identical_reports() {
    let args = ["coh", "game", "--stages", "8", "--seed", "11", "--json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_file_matches_json_stdout() {
    let path = std::env::temp_dir().join(format!("ordwalk-out-{}.json", std::process::id()));
    let args = ["ord", "fund", "w^2", "3"];
    let out = run(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "w*3");
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let (_, v) = report(&args);
    assert_eq!(file, v);
    let _ = std::fs::remove_file(path);
}
