use std::process::{Command, Output};

use serde_json::Value;

fn afl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afl")).args(args).env_remove("AFL_PRECISION_MAX").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn verify(m: &str, va: &str, vb: &str) -> Output {
    afl(&["verify", "--p", "5", "--parity", "odd", "--m", m, "--va", va, "--vb", vb])
}

#[test]
fn witnesses_report_one_and_four() {
    for (m, va, expected) in [("0", "0", 1), ("1", "1", 4)] {
        let out = verify(m, va, "0");
        assert_eq!(out.status.code(), Some(0));
        let rec = json(&out);
        for key in ["analytic_closed", "analytic_oracle", "geometric_total"] {
            assert_eq!(rec[key], expected, "{key} for m={m}");
        }
        assert_eq!(rec["afl_holds"], true);
    }
}

#[test]
fn non_integral_instance_is_zero_on_both_sides() {
    let out = verify("0", "0", "-1");
    assert_eq!(out.status.code(), Some(0));
    let rec = json(&out);
    assert_eq!(rec["integral"], false);
    assert_eq!(rec["analytic_closed"], 0);
    assert_eq!(rec["geometric_total"], 0);
}

#[test]
fn small_prime_is_a_usage_error() {
    let out = afl(&["verify", "--p", "3", "--parity", "odd", "--m", "0", "--va", "0", "--vb", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(afl(&["sweep", "--p", "5,3"]).status.code(), Some(2));
    assert_eq!(afl(&["cayley-suite", "--p", "3"]).status.code(), Some(2));
    assert_eq!(afl(&["verify", "--p", "5"]).status.code(), Some(2));
}

#[test]
fn exhausted_precision_exits_three() {
    let out = Command::new(env!("CARGO_BIN_EXE_afl"))
        .args(["verify", "--p", "5", "--parity", "odd", "--m", "2", "--va", "2", "--vb", "2"])
        .env("AFL_PRECISION_MAX", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn csv_sweep_has_fixed_header() {
    let out = afl(&["sweep", "--p", "5", "--max-vb", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,analytic_closed,analytic_oracle,geometric,afl_holds"));
    // 2 parities x 2 values of vb x (va = 0 and a = 0).
    assert_eq!(lines.count(), 8);
}

#[test]
fn empty_grid_is_an_empty_report() {
    let out = afl(&["sweep", "--p", "5", "--seeds", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["records"].as_array().map(Vec::len), Some(0));
    assert_eq!(report["summary"]["total"], 0);
}

#[test]
fn sweep_records_every_grid_point() {
    let out = afl(&["sweep", "--p", "5,7", "--max-m", "1", "--max-va", "1", "--max-vb", "1", "--seeds", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["summary"]["total"], 2 * 2 * 2 * 2 * 3 * 2);
    assert_eq!(report["summary"]["failed"], 0);
}

#[test]
fn cayley_suite_reports_and_allows_zero_samples() {
    let out = afl(&["cayley-suite", "--p", "5", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let out = afl(&["cayley-suite", "--p", "7", "--samples", "5", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    for check in report["checks"].as_array().unwrap() {
        assert_eq!(check["failed"], 0, "{check}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["sweep", "--p", "5", "--max-m", "1", "--max-va", "1", "--max-vb", "1", "--seeds", "2"];
    let (a, b) = (afl(&args), afl(&args));
    assert_eq!(a.stdout, b.stdout);
    let args = ["cayley-suite", "--p", "5", "--samples", "10", "--seed", "9"];
    assert_eq!(afl(&args).stdout, afl(&args).stdout);
}
