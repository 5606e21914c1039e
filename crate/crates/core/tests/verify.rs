//! Each check paired with a control it must reject.

use geoflow::conformal_geometry::{AmbientMetric, TargetMetric};
use geoflow::error::GeoError;
use geoflow::functionals::{variation_delta_f, variation_rhs, TorusPerturbation};
use geoflow::mcf::PlaneCurve;
use geoflow::rh_flow::{SelfSimilarBackground, StaticBackground};
use geoflow::suite::{circle_family, curved_torus, grim_reaper_family, monotonicity_series};
use geoflow::verify::{check_h_evolution, check_monotonicity, check_translating_soliton_eqs, FdReport, Gate, Resolution};

#[test]
fn variation_formula_rejects_the_wrong_coupling() {
    let state = curved_torus(32).unwrap();
    let target = TargetMetric::euclidean(1);
    let pert = TorusPerturbation::random(&state.grid, 1, 3);
    let v = variation_delta_f(&state, 1.0, &target, &pert, 1e-4).unwrap();
    assert!(v.report("right", 1e-4, Gate::Relative).pass);
    let wrong = variation_rhs(&state, 0.0, &target, &pert).unwrap();
    let r = FdReport::scalar("wrong_alpha", v.lhs, wrong, 1e-4, Gate::Relative, Resolution::default());
    assert!(!r.pass, "rel err {}", r.rel_err);
}

#[test]
fn variation_step_below_the_cancellation_floor_is_refused() {
    let state = curved_torus(32).unwrap();
    let pert = TorusPerturbation::random(&state.grid, 1, 0);
    let e = variation_delta_f(&state, 1.0, &TargetMetric::euclidean(1), &pert, 1e-14).unwrap_err();
    assert!(matches!(e, GeoError::Precondition(_)), "{e}");
}

#[test]
fn monotonicity_identity_notices_a_scaled_residual() {
    let series = monotonicity_series(2.5, 0.05, 256, 1e-5, 20, 7).unwrap();
    assert!(check_monotonicity(&series, 0.0, 1e-3).unwrap().pass());
    let mut forged = series.clone();
    forged.residual_integral.iter_mut().for_each(|r| *r *= 0.99);
    let report = check_monotonicity(&forged, 0.0, 1e-3).unwrap();
    assert!(!report.identity.pass, "rel err {}", report.identity.rel_err);
}

#[test]
fn increasing_phi_fails_monotonicity() {
    let mut series = monotonicity_series(2.5, 0.05, 256, 1e-5, 20, 5).unwrap();
    series.phi.reverse();
    let report = check_monotonicity(&series, 0.0, 1e-3).unwrap();
    assert!(!report.non_increasing && !report.pass());
}

#[test]
fn mean_curvature_evolution_depends_on_the_background() {
    let family = circle_family(256, 1e-5).unwrap();
    let flat = StaticBackground::plain(AmbientMetric::euclidean(2));
    assert!(check_h_evolution(&family, &flat, 2, 1e-3).unwrap().pass);
    let cigar = StaticBackground::plain(AmbientMetric::new(2, geoflow::conformal_geometry::RadialProfile::Cigar).unwrap());
    assert!(!check_h_evolution(&family, &cigar, 2, 1e-3).unwrap().pass);
}

#[test]
fn a_circle_is_not_a_translator() {
    let (bg, _, normal) = grim_reaper_family(512, 2.0, 1e-3, 5).unwrap();
    let reaper = normal.surfaces[2].as_curve().unwrap();
    assert!(check_translating_soliton_eqs(reaper, &bg, normal.times[2], 1e-4).unwrap().iter().all(|r| r.pass));
    let circle = PlaneCurve::circle([0.0, 0.0], 1.0, 256).unwrap();
    let reports = check_translating_soliton_eqs(&circle, &bg, 0.0, 1e-4).unwrap();
    assert!(reports.iter().any(|r| !r.pass));
}

#[test]
fn translator_equations_need_a_steady_background() {
    let circle = PlaneCurve::circle([0.0, 0.0], 1.0, 64).unwrap();
    let shrinker = SelfSimilarBackground::gaussian(2, 2.0).unwrap();
    assert!(check_translating_soliton_eqs(&circle, &shrinker, 0.0, 1e-4).is_err());
}

#[test]
fn nan_never_passes() {
    for gate in [Gate::Relative, Gate::Absolute] {
        let r = FdReport::vector("nan", vec![1.0, f64::NAN], vec![1.0, 2.0], 1e300, gate, Resolution::default());
        assert!(!r.pass);
    }
    let short = FdReport::vector("short", vec![1.0], vec![1.0, 2.0], 1.0, Gate::Absolute, Resolution::default());
    assert!(!short.pass);
}
