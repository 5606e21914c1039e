use geoflow::conformal_geometry::{AmbientMetric, RadialProfile, ScalarField, TargetMetric};
use geoflow::functionals::{f_alpha_torus, mean_curvature_rate, residual_integral, weighted_area};
use geoflow::mcf::{Hypersurface, PlaneCurve, SphereSurface};
use geoflow::numerics::spectral::PeriodicGrid;
use geoflow::rh_flow::{Background, SelfSimilarBackground, StaticBackground, TorusState};
use geoflow::suite::circle_family;
use std::f64::consts::PI;

#[test]
fn gaussian_weighted_area_of_round_spheres() {
    let e3 = AmbientMetric::euclidean(3);
    let gauss = ScalarField::Radial(RadialProfile::Quadratic { c0: 0.0, c2: 0.25 });
    for r in [0.5, 1.0, 2.0] {
        let s: Hypersurface = SphereSurface::new(r, 3).unwrap().into();
        let area = weighted_area(&s, &e3, &gauss).unwrap();
        let exact = 4.0 * PI * r * r * (-r * r / 4.0).exp();
        assert!((area - exact).abs() < 1e-13 * exact, "r = {r}: {area} vs {exact}");
    }
    let circle: Hypersurface = PlaneCurve::circle([0.0, 0.0], 1.5, 128).unwrap().into();
    let flat = ScalarField::Radial(RadialProfile::Constant(0.0));
    let len = weighted_area(&circle, &AmbientMetric::euclidean(2), &flat).unwrap();
    assert!((len - 3.0 * PI).abs() < 1e-12);
}

#[test]
fn residual_vanishes_on_the_self_shrinking_circle() {
    let horizon = 2.0;
    let bg = SelfSimilarBackground::gaussian(2, horizon).unwrap();
    let slice = bg.slice_at(0.0).unwrap();
    let shrinker: Hypersurface = PlaneCurve::circle([0.0, 0.0], (2.0 * horizon).sqrt(), 256).unwrap().into();
    assert!(residual_integral(&shrinker, &slice.metric, &slice.potential).unwrap() < 1e-20);
    let other: Hypersurface = PlaneCurve::circle([0.0, 0.0], 1.0, 256).unwrap().into();
    assert!(residual_integral(&other, &slice.metric, &slice.potential).unwrap() > 0.1);
}

#[test]
fn flat_torus_functional_is_zero() {
    let grid = PeriodicGrid::new(16);
    let zero = vec![0.0; grid.len()];
    let state = TorusState::conformal(grid, &zero, vec![vec![0.3; 256]], zero.clone()).unwrap();
    let b = f_alpha_torus(&state, 1.0, &TargetMetric::euclidean(1)).unwrap();
    assert!(b.total.abs() < 1e-13, "{}", b.total);
}

#[test]
fn shrinking_circle_curvature_grows_like_its_cube() {
    let family = circle_family(256, 1e-5).unwrap();
    let bg = StaticBackground::plain(AmbientMetric::euclidean(2));
    let t = family.times[2];
    let rate = mean_curvature_rate(&family, &bg, 2).unwrap();
    let exact = (1.0 - 2.0 * t).powf(-1.5);
    for v in rate {
        assert!((v - exact).abs() < 1e-3 * exact, "{v} vs {exact}");
    }
}
