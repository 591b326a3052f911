use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wronski_core::bethe::SolveOptions;
use wronski_core::field::FieldSpec;
use wronski_core::problem::{parse_tuple, Problem};
use wronski_core::reproduction::build_space;
use wronski_core::text::parse_poly;
use wronski_core::verify::{run_verify, SectorChoice, VerifyOptions};
use wronski_core::wronskian_eq::solve;
use wronski_core::QPoly;

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wronski"))
        .args(args)
        .env_remove("WRONSKI_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{}: {}", e, stdout(out)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_counts() {
    let out = run(&["--json", "validate", path_str(&problem("three_points.json"))]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["intersection_number"], 2);
    assert_eq!(v["T"][1], "x^3 - x");
    assert_eq!(v["l"], serde_json::json!([3]));
}

#[test]
fn dimension_mismatch_exits_3() {
    let out = run(&["validate", path_str(&problem("broken_dimension.json"))]);
    assert_eq!(code(&out), 3);
    let out = run(&["--json", "verify", path_str(&problem("broken_dimension.json"))]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["exit_code"], 3);
}

#[test]
fn malformed_input_exits_2() {
    let path = std::env::temp_dir().join(format!("wronski-malformed-{}.json", std::process::id()));
    std::fs::write(&path, "{\"d\": 3, \"N\": ").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code(&out), 2);
    let out = run(&["validate", "/nonexistent/problem.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["verify"])), 64);
    assert_eq!(code(&run(&["verify", "x.json", "--starts", "many"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn verify_match_exits_0() {
    let out = run(&["--json", "verify", path_str(&problem("cube_roots.json"))]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "MATCH");
    assert_eq!(v["target"], 2);
    let c = &v["sectors"][0]["components"][0];
    assert_eq!(c["multiplicity"]["multiplicity"], 2);
    assert_eq!(c["space"]["basis"], serde_json::json!(["x", "x^3 + 2"]));
}

#[test]
fn undercount_exits_4() {
    // one start cannot reach five points
    let out = run(&["verify", path_str(&problem("gr25_five_points.json")), "--starts", "1"]);
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).trim_end().ends_with("UNDERCOUNT"));
}

#[test]
fn verify_output_equals_library_report() {
    let path = problem("three_points.json");
    let out = run(&["--json", "verify", path_str(&path), "--starts", "50", "--seed", "3"]);
    let p = Problem::parse(&std::fs::read_to_string(&path).unwrap(), None).unwrap();
    let opts = VerifyOptions {
        solve: SolveOptions {
            starts: 50,
            seed: 3,
            ..Default::default()
        },
        sector: SectorChoice::Smallest,
        ..Default::default()
    };
    let report = run_verify(&p, &opts).unwrap();
    assert_eq!(stdout(&out), serde_json::to_string_pretty(&report).unwrap() + "\n");
}

#[test]
fn reproduce_equals_library_space() {
    let path = problem("cube_roots_tuple.json");
    let out = run(&["--json", "reproduce", "--tuple", path_str(&path)]);
    assert_eq!(code(&out), 0);
    let (_, tuple) = parse_tuple(&std::fs::read_to_string(&path).unwrap(), None).unwrap();
    let space = build_space(&tuple).unwrap();
    let basis: Vec<String> = space.basis.iter().map(|p| p.to_string()).collect();
    assert_eq!(json(&out)["basis"], serde_json::json!(basis));
}

#[test]
fn wronskian_solve_equals_library() {
    let out = run(&["--json", "wronskian-solve", "--y", "x", "--T", "x^3 - 1"]);
    assert_eq!(code(&out), 0);
    let f = FieldSpec::Rational;
    let y: QPoly = parse_poly("x", &f).unwrap();
    let t: QPoly = parse_poly("x^3 - 1", &f).unwrap();
    let s = solve(&y, &t).unwrap();
    let v = json(&out);
    assert_eq!(v["solvable"], true);
    assert_eq!(v["particular"], s.particular.to_string());

    let out = run(&["--json", "wronskian-solve", "--y", "x", "--T", "x"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["solvable"], false);
}

#[test]
fn reports_are_byte_stable() {
    let path = problem("gr25_five_points.json");
    let args = ["--json", "verify", path_str(&path), "--starts", "80"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let seeded = Command::new(env!("CARGO_BIN_EXE_wronski"))
        .args(args)
        .env("WRONSKI_SEED", "0")
        .output()
        .unwrap();
    assert_eq!(a.stdout, seeded.stdout);
}

#[test]
fn from_master_round_trips_through_validate() {
    let out = run(&["--json", "from-master", path_str(&problem("master_three_points.json"))]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["sector"]["lengths"], serde_json::json!([1]));
    let path = std::env::temp_dir().join(format!("wronski-from-master-{}.json", std::process::id()));
    std::fs::write(&path, serde_json::to_string(&v["problem"]).unwrap()).unwrap();
    let back = run(&["--json", "validate", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code(&back), 0);
    assert_eq!(json(&back)["intersection_number"], 2);
}

#[test]
fn master_problem_verifies_in_its_sector() {
    let out = run(&["--json", "verify", path_str(&problem("master_three_points.json"))]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["sectors"][0]["lengths"], serde_json::json!([1]));
}

#[test]
fn lr_and_mult() {
    let out = run(&["--json", "lr", "--lambda", "1", "--mu", "1", "--box", "2", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["product"].as_array().unwrap().len(), 2);
    let out = run(&["--json", "mult", "--system", path_str(&problem("fat_point.json")), "--point", "0,0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["multiplicity"], 3);
}

#[test]
fn field_override() {
    let out = run(&[
        "--json",
        "--field",
        "extension:x^2 - 3",
        "bethe-solve",
        "--problem",
        path_str(&problem("three_points.json")),
        "--candidate",
        "a/3",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(json(&out)["multiplicity"]["multiplicity"], 1);
}
