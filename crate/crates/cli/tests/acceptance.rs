//! The eleven acceptance criteria, one test each. Every test prints its
//! pass/fail line (visible with `--nocapture`) before asserting.

use pam_cli::validate::{criterion, Suite};

fn check(id: usize) {
    let outcome = criterion(id, Suite::Full);
    println!("{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn criterion_01_two_sided_routes() {
    check(1);
}

#[test]
fn criterion_02_one_sided_routes() {
    check(2);
}

#[test]
fn criterion_03_partition_expansion() {
    check(3);
}

#[test]
fn criterion_04_delta_data() {
    check(4);
}

#[test]
fn criterion_05_closed_forms() {
    check(5);
}

#[test]
fn criterion_06_symmetric_growth_rate() {
    check(6);
}

#[test]
fn criterion_07_one_sided_growth_rates() {
    check(7);
}

#[test]
fn criterion_08_intermittency() {
    check(8);
}

#[test]
fn criterion_09_monte_carlo() {
    check(9);
}

#[test]
fn criterion_10_continuum() {
    check(10);
}

#[test]
fn criterion_11_figure() {
    check(11);
}
