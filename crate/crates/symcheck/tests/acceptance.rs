//! Acceptance suite: one test per verification criterion, each printing a
//! pass/fail line and asserting its runtime budget. Criterion 12 streams the
//! 68k-row Cayley-plane system and is gated behind `--ignored`.

use std::time::{Duration, Instant};

use symcheck::verify;

fn run(id: &str, budget: Duration) {
    let c = verify::CRITERIA
        .iter()
        .find(|c| c.id == id)
        .expect("criterion exists");
    let t = Instant::now();
    let (pass, detail) = (c.run)(0).expect("criterion runs");
    let elapsed = t.elapsed();
    println!(
        "{} criterion {:>2}: {} ({} ms) - {}",
        if pass { "PASS" } else { "FAIL" },
        c.id,
        c.desc,
        elapsed.as_millis(),
        detail
    );
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(
        elapsed < budget,
        "criterion {id} exceeded its budget: {elapsed:?} >= {budget:?}"
    );
}

#[test]
fn criterion_01_sl3so3_dim_14() {
    run("1", Duration::from_secs(1));
}

#[test]
fn criterion_02_su3so3_duality() {
    run("2", Duration::from_secs(1));
}

#[test]
fn criterion_03_explicit_families() {
    run("3", Duration::from_secs(1));
}

#[test]
fn criterion_04_zero_sets() {
    // budget is per space in the criterion statement; five solves run here
    run("4", Duration::from_secs(5 * 60));
}

#[test]
fn criterion_05_cp2_golden_dim_8() {
    run("5", Duration::from_secs(10));
}

#[test]
fn criterion_06_products() {
    run("6", Duration::from_secs(600));
}

#[test]
fn criterion_07_lemma3_dims() {
    run("7", Duration::from_secs(6 * 60));
}

#[test]
fn criterion_08_gr43_decomposables() {
    run("8", Duration::from_secs(5 * 60));
}

#[test]
fn criterion_09_spin9_suite() {
    run("9", Duration::from_secs(5 * 60));
}

#[test]
fn criterion_10_curvature_suite() {
    run("10", Duration::from_secs(2 * 60));
}

#[test]
fn criterion_11_root_suite() {
    run("11", Duration::from_secs(2 * 60));
}

#[test]
#[ignore = "30-minute budget; run with --ignored or `symcheck verify-all --slow`"]
fn criterion_12_op2_slow() {
    run("12", Duration::from_secs(30 * 60));
}

#[test]
fn criterion_13_scale_invariance() {
    run("13", Duration::from_secs(5));
}
