//! One test per acceptance criterion; each prints a single PASS/FAIL line and
//! the supporting reports.

use geoflow::suite::{self, CriterionOutcome};

fn assert_criterion(outcome: CriterionOutcome) {
    print!("{outcome}");
    assert!(outcome.pass(), "criterion {} failed: {:?}", outcome.id, outcome.failures());
}

#[test]
fn criterion_01_gaussian_shrinker_ode() {
    assert_criterion(suite::gaussian_shrinker_ode());
}

#[test]
fn criterion_02_cigar_soliton() {
    assert_criterion(suite::cigar_soliton());
}

#[test]
fn criterion_03_huisken_constancy() {
    assert_criterion(suite::huisken_constancy());
}

#[test]
fn criterion_04_monotonicity() {
    assert_criterion(suite::monotonicity());
}

#[test]
fn criterion_05_evolution_equations() {
    assert_criterion(suite::evolution_equations());
}

#[test]
fn criterion_06_harnack_vanishing() {
    assert_criterion(suite::harnack_vanishing());
}

#[test]
fn criterion_07_variation_formula() {
    assert_criterion(suite::variation_formula());
}

#[test]
fn criterion_08_functional_derivative() {
    assert_criterion(suite::functional_derivative());
}

#[test]
fn criterion_09_conjugate_heat() {
    assert_criterion(suite::conjugate_heat());
}

#[test]
fn criterion_10_geometry_kernels() {
    assert_criterion(suite::geometry_kernels());
}

#[test]
fn criterion_11_soliton_families() {
    assert_criterion(suite::soliton_families());
}
