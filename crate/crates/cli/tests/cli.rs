//! End-to-end tests of the command-line interface: output formats, the
//! exit-code contract, and byte-level determinism of reports.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treebergman"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

#[test]
fn eval_examples_from_the_interface_contract() {
    assert_eq!(stdout(&["eval", "kernel", "--v", "0:", "--x", "0:"]).trim(), "0.24");
    assert_eq!(stdout(&["eval", "sigma", "--x", "0:1"]).trim(), "0.25");
    assert_eq!(stdout(&["eval", "rho", "--x", "0:1", "--y", "1:"]).trim(), "1");
}

#[test]
fn eval_rejects_bad_vertices() {
    let out = run(&["eval", "sigma", "--x", "0:01"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-canonical"));
    // digit out of range for the branching parameter
    let out = run(&["eval", "sigma", "--x", "0:7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_is_deterministic_and_reports_rows() {
    let args = ["suite", "geometry", "--seed", "3"];
    let first = stdout(&args);
    let second = stdout(&args);
    assert_eq!(first, second, "identical config must give identical bytes");
    let mut lines = first.lines();
    assert_eq!(
        lines.next().unwrap(),
        "check_id,anchor,input,expected,got,tol,pass"
    );
    assert!(first.lines().skip(1).all(|l| l.ends_with(",true")));
    // rows arrive sorted by check id
    let ids: Vec<&str> = first
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn unknown_suite_fails_with_nonzero_exit() {
    let out = run(&["suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("known suites"));
}

#[test]
fn invalid_parameters_are_rejected() {
    let out = run(&["--alpha", "0.5", "eval", "sigma", "--x", "0:"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--q", "1", "eval", "sigma", "--x", "0:"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_mode_emits_structured_rows() {
    let text = stdout(&["--json", "eval", "kernel", "--v", "0:", "--x", "0:"]);
    let value: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(value["op"], "kernel");
    assert!((value["value"].as_f64().unwrap() - 0.24).abs() < 1e-12);

    let text = stdout(&["--json", "coeff", "dump", "--n-min", "0", "--n-max", "1"]);
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rows[0]["key"], "c");
    assert_eq!(rows[1]["key"], "cp");
}

#[test]
fn function_files_round_trip_through_the_operators() {
    let dir = std::env::temp_dir().join("treebergman-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.csv");
    std::fs::write(&path, "0:1,16\n").unwrap();
    let p = path.to_str().unwrap();

    // the worked decomposition: one selected sector, constant 2 good part
    let text = stdout(&["cz", "--f", p, "--lambda", "1"]);
    assert!(text.contains("selected,U(0:),"));
    assert!(text.contains("good_sector,0:,2"));
    assert!(text.contains("bad_point[U(0:)],0:1,14"));

    // projection of the same file at two vertices
    let text = stdout(&["eval", "project", "--f", p, "--at", "0:1,0:"]);
    assert!(text.lines().count() == 3);
    assert!(text.starts_with("vertex,value"));

    // atom checks: scaled two-point bump against its sector
    std::fs::write(&path, "0:10,0.5\n0:11,-0.5\n").unwrap();
    let text = stdout(&["atom-check", "--f", p, "--p", "inf", "--cell", "0:1"]);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("true,U(0:1),"), "got row {row}");

    let text = stdout(&["bmo", "--f", p]);
    assert!(text.starts_with("key,value\nbmo_norm,"));

    let text = stdout(&["weak11", "--f", p, "--lambdas", "0.05,0.2", "--window", "4"]);
    assert_eq!(text.lines().next().unwrap(), "lambda,mass,bound,ratio");
    assert_eq!(text.lines().count(), 3);

    // arguments at different depths: off-sector kernel columns depend on
    // their argument only through its level, so equal-depth pairs cancel
    let text = stdout(&["hormander", "--v", "0:1", "--x", "0:10", "--y", "0:1", "--window", "4"]);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let lower: f64 = fields[0].parse().unwrap();
    let upper: f64 = fields[1].parse().unwrap();
    assert!(0.0 < lower && lower <= upper);
    let text = stdout(&["hormander", "--v", "0:1", "--x", "0:10", "--y", "0:11", "--window", "4"]);
    assert_eq!(text.lines().nth(1).unwrap(), "0,0");
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let dir = std::env::temp_dir().join("treebergman-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.csv");
    let _ = std::fs::remove_file(&path);
    let out = run(&[
        "suite",
        "geometry",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(Path::new(&path).exists());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("check_id,"));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = std::env::temp_dir().join("treebergman-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.csv");
    std::fs::write(&path, "0:,1.0\nnot-a-vertex,2.0\n").unwrap();
    let out = run(&["bmo", "--f", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
