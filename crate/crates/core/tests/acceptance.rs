//! Acceptance criteria, one test each. Every test prints a PASS/FAIL line
//! with the worst residual; run with `--nocapture` to see them.

use qgamma::acceptance::{run_criterion, CRITERIA};

const SEED: u64 = 0;

fn check(id: usize) {
    let report = run_criterion(id, SEED).expect("criterion runs");
    println!("{report}");
    assert!(report.passed, "{report}");
}

#[test]
fn criterion_01_classical_special_cases() {
    check(1);
}

#[test]
fn criterion_02_index_duality() {
    check(2);
}

#[test]
fn criterion_03_bregman_equivalence() {
    check(3);
}

#[test]
fn criterion_04_quasi_entropy_equivalence() {
    check(4);
}

#[test]
fn criterion_05_markov_monotonicity() {
    check(5);
}

#[test]
fn criterion_06_channel_duality() {
    check(6);
}

#[test]
fn criterion_07_cosine_identity() {
    check(7);
}

#[test]
fn criterion_08_boundary_limit() {
    check(8);
}

#[test]
fn criterion_09_hilbert_case() {
    check(9);
}

#[test]
fn criterion_10_bregman_projection() {
    check(10);
}

#[test]
fn criterion_11_fenchel_conjugate() {
    check(11);
}

#[test]
fn criterion_12_gradient_check() {
    check(12);
}

#[test]
fn every_criterion_has_a_test() {
    assert_eq!(CRITERIA.len(), 12);
}
