//! Acceptance suite: one test per criterion, printing a pass/fail line
//! each. Criteria 1-9 run at full scale; criterion 10 runs the quick suite
//! twice through `check_all` and compares bytes.

use coarsehom::suite::{check_all, run_criterion, Scale};

fn assert_criterion(number: u8) {
    let result = run_criterion(number, Scale::Full);
    println!("{}", result.summary());
    for line in &result.details {
        println!("    {line}");
    }
    assert!(result.passed, "{}", result.summary());
}

#[test]
fn criterion_01_lattice_obstruction() {
    assert_criterion(1);
}

#[test]
fn criterion_02_tree_vanishing() {
    assert_criterion(2);
}

#[test]
fn criterion_03_duality_zero_gap() {
    assert_criterion(3);
}

#[test]
fn criterion_04_certificate_exclusivity() {
    assert_criterion(4);
}

#[test]
fn criterion_05_psc_trichotomy() {
    assert_criterion(5);
}

#[test]
fn criterion_06_foelner_consistency() {
    assert_criterion(6);
}

#[test]
fn criterion_07_spectral_closed_forms() {
    assert_criterion(7);
}

#[test]
fn criterion_08_weyl_bound() {
    assert_criterion(8);
}

#[test]
fn criterion_09_covering_eigenvalue_bound() {
    assert_criterion(9);
}

#[test]
fn criterion_10_suite_determinism() {
    let start = std::time::Instant::now();
    let report = check_all(Scale::Quick);
    let elapsed = start.elapsed();
    let ten = report
        .results
        .iter()
        .find(|r| r.number == 10)
        .expect("determinism criterion present");
    println!("{}", ten.summary());
    for line in &ten.details {
        println!("    {line}");
    }
    assert!(ten.passed, "{}", ten.summary());
    // the doubled quick suite still fits comfortably in the window the
    // single pass is budgeted for
    assert!(
        elapsed.as_secs() < 240,
        "doubled quick suite took {elapsed:?}"
    );
    assert!(report.all_passed, "quick suite reported failures");
    // a fresh run serializes to the same bytes as the first
    let again = check_all(Scale::Quick);
    assert_eq!(
        serde_json::to_vec(&report.results).unwrap(),
        serde_json::to_vec(&again.results).unwrap(),
        "whole-suite reports differ between runs"
    );
}
