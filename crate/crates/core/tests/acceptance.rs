//! Acceptance criteria at reference sizes. Each test prints one PASS/FAIL
//! line per criterion it covers and fails if any of them failed.

use std::io::Write;

use pwlab::selftest::{run_criteria, CriterionResult, Profile};

const SEED: u64 = 7;

fn check(ids: &[u32], profile: Profile) {
    let start = std::time::Instant::now();
    let results = run_criteria(ids, profile, SEED);
    assert_eq!(results.len(), ids.len());
    // straight to the handle: the harness captures `println!` of passing tests
    let mut out = std::io::stdout().lock();
    for r in &results {
        writeln!(out, "{}", r.line()).unwrap();
    }
    writeln!(
        out,
        "   criteria {ids:?} took {:.1} s",
        start.elapsed().as_secs_f64()
    )
    .unwrap();
    drop(out);
    let failed: Vec<&CriterionResult> = results.iter().filter(|r| !r.passed).collect();
    assert!(
        failed.is_empty(),
        "failed: {:?}",
        failed.iter().map(|r| r.id).collect::<Vec<_>>()
    );
}

#[test]
fn criteria_01_02_conservation() {
    check(&[1, 2], Profile::Full);
}

#[test]
fn criterion_03_wigner_match() {
    check(&[3], Profile::Full);
}

#[test]
fn criteria_04_05_corpus() {
    check(&[4, 5], Profile::Full);
}

#[test]
fn criterion_06_cyclotron() {
    check(&[6], Profile::Full);
}

#[test]
fn criterion_07_theta_exactness() {
    check(&[7], Profile::Full);
}

#[test]
fn criterion_08_residual_order() {
    check(&[8], Profile::Full);
}

#[test]
fn criteria_09_to_13_semiclassical_ladders() {
    check(&[9, 10, 11, 12, 13], Profile::Full);
}

#[test]
fn criterion_14_admissibility() {
    check(&[14], Profile::Full);
}

#[test]
fn criterion_15_reproducibility() {
    check(&[15], Profile::Quick);
}
