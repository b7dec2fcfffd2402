//! The acceptance manifest as an integration test target: one test and one
//! printed pass/fail line per criterion. The same checks back the `verify`
//! CLI subcommand.

use std::path::Path;

use gibbs_shapes::acceptance::{self, CheckResult};

fn assert_check(result: CheckResult) {
    println!("{}", result.report_line());
    assert!(
        result.pass,
        "{}: statistic {} vs threshold {} ({})",
        result.id, result.statistic, result.threshold, result.detail
    );
}

#[test]
fn criterion_01_bell_identity() {
    assert_check(acceptance::check_01_bell());
}

#[test]
fn criterion_02_poissonization() {
    assert_check(acceptance::check_02_poissonization());
}

#[test]
fn criterion_03_multiplicativity() {
    assert_check(acceptance::check_03_multiplicativity());
}

#[test]
fn criterion_04_step_limit() {
    assert_check(acceptance::check_04_step_limit());
}

#[test]
fn criterion_05_concentration() {
    assert_check(acceptance::check_05_concentration());
}

#[test]
fn criterion_06_gamma_shape() {
    assert_check(acceptance::check_06_gamma_shape());
}

#[test]
fn criterion_07_poisson_process() {
    assert_check(acceptance::check_07_poisson_process());
}

#[test]
fn criterion_08_gaussian_profile() {
    assert_check(acceptance::check_08_gaussian_profile());
}

#[test]
fn criterion_09_discrete_gaussian() {
    assert_check(acceptance::check_09_discrete_gaussian());
}

#[test]
fn criterion_10_hard_step() {
    assert_check(acceptance::check_10_hard_step());
}

#[test]
fn criterion_11_counterexample() {
    assert_check(acceptance::check_11_counterexample());
}

#[test]
fn criterion_12_no_shape() {
    assert_check(acceptance::check_12_no_shape());
}

#[test]
fn criterion_13_special_values() {
    assert_check(acceptance::check_13_special_values());
}

#[test]
fn criterion_14_reproducibility() {
    let bin = Path::new(env!("CARGO_BIN_EXE_gibbs-shapes"));
    assert_check(acceptance::check_14_reproducibility(bin));
}
