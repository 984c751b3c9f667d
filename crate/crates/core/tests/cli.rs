use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hblcert")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf-8 output"))
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--format", "json"]);
    let (code, out) = run(&all);
    let v: Value = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}"));
    let schema: Value =
        serde_json::from_str(include_str!("../schema/report.schema.json")).expect("schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{args:?}: {errors:?}\n{v:#}");
    assert_eq!(v["exit_code"], code);
    (code, v)
}

#[test]
fn verify_r6_is_valid() {
    let (code, v) = run_json(&[
        "verify",
        "--data",
        &fixture("r6_data.json"),
        "--presentation",
        &fixture("r6_presentation.json"),
        "--bound",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "valid");
    assert_eq!(v["details"]["bound"]["normalized"][0]["base"], "2");
    assert_eq!(v["details"]["bound"]["normalized"][0]["exponent"], "-1/2");
}

#[test]
fn verify_mismatched_presentation_is_invalid() {
    let (code, v) = run_json(&[
        "verify",
        "--data",
        &fixture("lw2_violating_data.json"),
        "--presentation",
        &fixture("lw2_presentation.json"),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "invalid");
    let kinds: Vec<&str> = v["details"]["failures"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["kind"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"theta-mass"), "{kinds:?}");
}

#[test]
fn check_data_verdicts() {
    let (code, v) = run_json(&["check-data", "--data", &fixture("lw2_violating_data.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["details"]["violation"]["subspace"], "span{e1}");
    assert_eq!(v["details"]["violation"]["slack"], "-1/4");

    let (code, v) = run_json(&["check-data", "--data", &fixture("lw2_unscaled_data.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["details"]["scaling"]["lhs"], "3");
    assert_eq!(v["details"]["scaling"]["rhs"], "6");

    let (code, v) = run_json(&["check-data", "--data", &fixture("lw2_data.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["details"]["lattice"]["closed"], true);
}

#[test]
fn polytope_forces_one_half() {
    let (code, v) = run_json(&[
        "polytope",
        "--data",
        &fixture("r6_data.json"),
        "--candidates",
        &fixture("r6_line_candidates.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["details"]["vertices"], serde_json::json!([["1/2", "1/2", "1/2", "1/2"]]));
    assert_eq!(v["details"]["extreme"], true);
}

#[test]
fn build_writes_a_verifiable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("built.json");
    let out_s = out.to_string_lossy().into_owned();
    let (code, v) = run_json(&[
        "build",
        "--data",
        &fixture("r6_data.json"),
        "--candidates",
        &fixture("r6_line_candidates.json"),
        "--out",
        &out_s,
    ]);
    assert_eq!(code, 0);
    assert!(v["details"]["vertices"].as_u64().unwrap() <= 3907);
    let (code, _) = run(&["verify", "--data", &fixture("r6_data.json"), "--presentation", &out_s]);
    assert_eq!(code, 0);
}

#[test]
fn build_on_violating_data_is_infeasible() {
    let (code, v) = run_json(&["build", "--data", &fixture("lw2_violating_data.json")]);
    assert_eq!(code, 1);
    assert!(v["details"]["reason"].as_str().unwrap().contains("span{e1}"));
}

#[test]
fn bound_decompose_project_dot() {
    let data = fixture("r6_data.json");
    let pres = fixture("r6_presentation.json");
    let (code, v) = run_json(&["bound", "--data", &data, "--presentation", &pres]);
    assert_eq!(code, 0);
    assert!((v["details"]["value"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);

    let (code, v) = run_json(&["decompose-flow", "--data", &data, "--presentation", &pres]);
    assert_eq!(code, 0);
    let sigma = v["details"]["decompositions"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(sigma["weight"], "sigma");
    assert_eq!(sigma["terms"].as_array().unwrap().len(), 2);

    let (code, v) = run_json(&["project", "--data", &data, "--presentation", &pres, "--map", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["details"]["ambient"], 2);

    let (code, dot) = run(&["export-dot", "--data", &data, "--presentation", &pres, "--format", "dot"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("digraph presentation {"));
    assert!(dot.contains("v4 -> v6 [label=\"(0*,1/2*,0*,1/2)\"]"));
    let (code, _) = run_json(&["export-dot", "--data", &data, "--presentation", &pres]);
    assert_eq!(code, 0);
}

#[test]
fn gaussian_and_quadrature() {
    let (code, v) = run_json(&["gaussian", "--data", &fixture("lw2_violating_data.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["details"]["diverged"], true);

    let (code, _) = run_json(&[
        "gaussian",
        "--data",
        &fixture("lw2_data.json"),
        "--presentation",
        &fixture("lw2_presentation.json"),
        "--samples",
        "20",
    ]);
    assert_eq!(code, 0);

    let g = fixture("unit_square_64.grid");
    let (code, v) = run_json(&[
        "quadrature",
        "--data",
        &fixture("lw2_data.json"),
        "--presentation",
        &fixture("lw2_presentation.json"),
        "--grid",
        &g,
        &g,
        &g,
    ]);
    assert_eq!(code, 0);
    assert!((v["details"]["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    let (code, v) = run_json(&["verify", "--data", &fixture("r6_data.json")]);
    assert_eq!(code, 2);
    assert!(v["details"]["error"].as_str().unwrap().contains("--presentation"));
    let (code, _) = run_json(&["verify", "--data", "/nonexistent.json", "--presentation", "/x.json"]);
    assert_eq!(code, 2);
    let (code, _) = run(&["no-such-command"]);
    assert_eq!(code, 2);
    let (code, _) = run_json(&["check-data", "--data", &fixture("r6_data.json"), "--tol", "0"]);
    assert_eq!(code, 2);
}

#[test]
fn output_is_deterministic() {
    let args = [
        "gaussian",
        "--data",
        &fixture("r6_data.json"),
        "--presentation",
        &fixture("r6_presentation.json"),
        "--samples",
        "5",
        "--seed",
        "7",
        "--format",
        "json",
    ];
    assert_eq!(run(&args), run(&args));
    let build = ["build", "--data", &fixture("r6_data.json"), "--candidates", &fixture("r6_line_candidates.json")];
    assert_eq!(run(&build), run(&build));
}
