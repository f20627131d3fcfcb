//! End-to-end command-line tests: report shapes, error paths and exit
//! codes, and byte-level determinism of repeated runs.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coarsehom"))
}

#[test]
fn decide_reports_an_obstructed_lattice() {
    let out = bin()
        .args([
            "decide",
            "--space",
            "lattice:2",
            "--demand",
            "all-ones",
            "--reach",
            "1",
            "--sizes",
            "2,3,4,6",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], "coarsehom.report.v1");
    assert_eq!(report["payload"]["decision"]["verdict"], "obstructed");
    // per-size capacities are present and growing
    let sizes = report["payload"]["per_size"].as_array().unwrap();
    assert_eq!(sizes.len(), 4);
    let cs: Vec<f64> = sizes
        .iter()
        .map(|s| s["c_star"].as_f64().unwrap())
        .collect();
    assert!(cs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn decide_runs_are_byte_identical() {
    let run = || {
        bin()
            .args([
                "decide", "--space", "tree:3", "--reach", "1", "--sizes", "3,4,5",
            ])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn spectrum_matches_the_closed_form() {
    let out = bin()
        .args(["spectrum", "--mesh", "circle", "--subdiv", "16"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let eigenvalues = report["payload"]["eigenvalues"].as_array().unwrap();
    assert_eq!(eigenvalues.len(), 16);
    let h = std::f64::consts::TAU / 16.0;
    let mut exact: Vec<f64> = (0..16)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 / 16.0).sin();
            4.0 * s * s / (h * h)
        })
        .collect();
    exact.sort_by(f64::total_cmp);
    for (got, want) in eigenvalues.iter().zip(&exact) {
        let got = got.as_f64().unwrap();
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
    }
}

#[test]
fn malformed_spec_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, r#"{"family":"lattice","m":2}"#).unwrap();
    let out = bin()
        .args(["decide", "--space", path.to_str().unwrap(), "--sizes", "2,3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error"), "stderr: {stderr}");
    // the message names the missing field
    assert!(stderr.contains("`n`") || stderr.contains("missing field"), "stderr: {stderr}");
}

#[test]
fn unknown_flags_are_rejected() {
    let out = bin()
        .args(["decide", "--space", "lattice:2", "--sizes", "2,3", "--bogus"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn numerical_failures_use_their_own_exit_code() {
    // a single-vertex window has no escape for a unit demand
    let out = bin()
        .args([
            "tails", "--space", "tree:3", "--size", "0", "--demand", "delta",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn tails_and_cut_bracket_the_least_capacity() {
    let tails = bin()
        .args(["tails", "--space", "lattice:2", "--size", "4"])
        .output()
        .unwrap();
    assert!(tails.status.success());
    let report: serde_json::Value = serde_json::from_slice(&tails.stdout).unwrap();
    assert_eq!(report["payload"]["certificate"]["kind"], "tails");

    let cut = bin()
        .args(["cut", "--space", "lattice:2", "--size", "4"])
        .output()
        .unwrap();
    assert!(cut.status.success());
    let report: serde_json::Value = serde_json::from_slice(&cut.stdout).unwrap();
    assert_eq!(report["payload"]["certificate"]["kind"], "obstruction");
    assert!(report["payload"]["certificate"]["violation"].as_f64().unwrap() > 0.0);
}

#[test]
fn profile_emits_the_documented_csv_columns() {
    let out = bin()
        .args([
            "profile", "--space", "lattice:1", "--family", "balls", "--radii", "2,4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("region_id,vol_R,vol_dR,ratio"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn weyl_emits_the_documented_csv_columns() {
    let out = bin()
        .args(["weyl", "--family", "circle", "--sizes", "64,128,256"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("lambda,N_lambda,vol,n,bound_rhs\n"));
    // the bound column dominates the count column on every row
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let n: f64 = cols[1].parse().unwrap();
        let rhs: f64 = cols[4].parse().unwrap();
        assert!(n <= rhs + 1e-9, "{line}");
    }
}

#[test]
fn check_all_quick_twice_is_byte_identical_and_fast() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    let start = std::time::Instant::now();
    let a = bin()
        .args(["check-all", "--profile", "quick", "--out", first.to_str().unwrap()])
        .output()
        .unwrap();
    let first_elapsed = start.elapsed();
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = bin()
        .args(["check-all", "--profile", "quick", "--out", second.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(b.status.success());
    let bytes_a = std::fs::read(&first).unwrap();
    let bytes_b = std::fs::read(&second).unwrap();
    assert_eq!(bytes_a, bytes_b, "reports differ between runs");
    // one invocation covers the whole quick suite twice internally; the
    // documented budget is two minutes for the suite itself
    assert!(
        first_elapsed.as_secs() < 120,
        "check-all quick took {first_elapsed:?}"
    );
    let report: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(report["payload"]["all_passed"], true);
    assert_eq!(report["payload"]["results"].as_array().unwrap().len(), 10);
}
