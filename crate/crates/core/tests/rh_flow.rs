use geoflow::conformal_geometry::{AmbientMetric, MapField, RadialProfile, ScalarField, TargetMetric};
use geoflow::numerics::spectral::PeriodicGrid;
use geoflow::rh_flow::{
    flow_rates, BoundaryRule, ConjugateHeatProblem, DomainMotion, RadialMedium, SelfSimilarBackground, TorusFlow,
    TorusState,
};
use std::f64::consts::PI;

fn heat_kernel(m: f64, tau: f64, r: f64) -> f64 {
    (4.0 * PI * tau).powf(-m / 2.0) * (-r * r / (4.0 * tau)).exp()
}

#[test]
fn backward_heat_kernel_m3() {
    let horizon = 1.0;
    let p = ConjugateHeatProblem {
        medium: RadialMedium::from_metric(
            AmbientMetric::euclidean(3),
            MapField::Constant(vec![0.0]),
            TargetMetric::euclidean(1),
            0.0,
        ),
        domain: DomainMotion::fixed(0.0, 8.0),
        inner: BoundaryRule::Regular,
        outer: BoundaryRule::Dirichlet(0.0),
    };
    let (t0, t1) = (horizon - 1.0, horizon - 0.1);
    let tr = p.solve(|r| heat_kernel(3.0, horizon - t1, r), t0, t1, 8 * 64 + 1, 900).unwrap();
    let mut worst: f64 = 0.0;
    for s in &tr.states {
        for (r, u) in s.r.iter().zip(&s.u) {
            worst = worst.max((u - heat_kernel(3.0, horizon - s.time, *r)).abs());
        }
    }
    assert!(worst < 1e-4, "L∞ error {worst:e}");
    // Mass is conserved by the adjoint equation on whole space; the kernel's
    // mass beyond r = 8 at T − t = 1 is about 1e−6.
    let medium = &p.medium;
    let m0 = tr.states[0].mass(medium).unwrap();
    let m1 = tr.states.last().unwrap().mass(medium).unwrap();
    assert!((m0 - m1).abs() < 1e-5, "{m0} {m1}");
}

#[test]
fn gaussian_flow_is_the_closed_form_dilation() {
    let bg = SelfSimilarBackground::gaussian(2, 1.0).unwrap();
    let x0 = [0.6, -0.3];
    for t in [0.0, 0.3, 0.75, 0.95] {
        let y = bg.diffeo_flow(&x0, t).unwrap();
        let s = 1.0 / (1.0 - t).sqrt();
        let err = (y[0] - s * x0[0]).abs().max((y[1] - s * x0[1]).abs());
        assert!(err < 1e-8 * s, "t = {t}: {err:e}");
        let back = bg.diffeo_flow_inverse(&y, t).unwrap();
        assert!((back[0] - x0[0]).abs() < 1e-8);
        // Radial coordinate of the inverse map: r₀√(T−t)/√(T−t₀).
        let inv = bg.diffeo_flow_inverse(&x0, t).unwrap();
        let r0 = (x0[0] * x0[0] + x0[1] * x0[1]).sqrt();
        let ri = (inv[0] * inv[0] + inv[1] * inv[1]).sqrt();
        assert!((ri - r0 * (1.0 - t).sqrt()).abs() < 1e-8);
    }
}

#[test]
fn flow_group_property() {
    let bg = SelfSimilarBackground::cigar().unwrap();
    let x = [0.8, 0.4];
    let direct = bg.diffeo_flow(&x, 1.3).unwrap();
    let mid = bg.diffeo_flow(&x, 0.5).unwrap();
    let via = bg.transport(&mid, 0.5, 1.3).unwrap();
    assert!((direct[0] - via[0]).abs() < 1e-8 && (direct[1] - via[1]).abs() < 1e-8);
}

#[test]
fn identity_time_returns_base_fields() {
    for bg in [SelfSimilarBackground::gaussian(3, 2.0).unwrap(), SelfSimilarBackground::cigar().unwrap()] {
        let t = bg.params().identity_time();
        let x: Vec<f64> = (0..bg.dim()).map(|i| 0.3 + 0.2 * i as f64).collect();
        let (f, _, pot) = bg.background_eval(t, &x).unwrap();
        assert_eq!(f, bg.metric().factor_at(&x).unwrap());
        assert_eq!(pot, bg.potential().value(&x).unwrap());
    }
}

#[test]
fn cigar_slice_matches_path_then_evaluate() {
    let bg = SelfSimilarBackground::cigar().unwrap();
    let (_, _, closed) = bg.background_eval(1.0, &[1.0, 0.0]).unwrap();
    let traced = bg.potential_by_tracing(1.0, &[1.0, 0.0]).unwrap();
    assert!((closed - traced).abs() < 1e-9, "{closed} {traced}");
}

#[test]
fn potential_evolution_examples() {
    let g = SelfSimilarBackground::gaussian(2, 1.0).unwrap();
    let rep = g.check_potential_evolution(0.0, &[1.0, 0.0], 1e-4).unwrap();
    assert!(rep.pass && (rep.rhs[0] - 0.25).abs() < 1e-14, "{rep}");
    let lin = SelfSimilarBackground::linear(vec![1.0, 0.0]).unwrap();
    let rep = lin.check_potential_evolution(0.7, &[0.2, 0.9], 1e-4).unwrap();
    assert!(rep.pass && (rep.lhs[0] - 1.0).abs() < 1e-9, "{rep}");
    let moved = lin.diffeo_flow(&[0.2, 0.9], 0.7).unwrap();
    assert!((moved[0] - 0.9).abs() < 1e-10 && (moved[1] - 0.9).abs() < 1e-12);
    let cig = SelfSimilarBackground::cigar().unwrap();
    assert!(cig.check_potential_evolution(0.4, &[0.7, -0.2], 1e-4).unwrap().pass);
}

#[test]
fn non_soliton_potential_is_refused() {
    let r = SelfSimilarBackground::new(
        AmbientMetric::new(2, RadialProfile::Cigar).unwrap(),
        TargetMetric::euclidean(1),
        MapField::Constant(vec![0.0]),
        ScalarField::Radial(RadialProfile::LogOnePlusSquare { scale: 1.0 }),
        geoflow::soliton_ode::SolitonParams::steady(0.0),
    );
    assert!(r.is_err());
}

fn torus_state(n: usize) -> TorusState {
    let grid = PeriodicGrid::new(n);
    let w = grid.sample(|x, y| 0.1 * x.cos() * y.sin());
    let f = grid.sample(|x, y| 0.3 * x.sin() + 0.2 * (x + y).cos());
    let phi = grid.sample(|x, y| 0.4 * y.cos() + 0.1 * (2.0 * x).sin());
    TorusState::conformal(grid, &w, vec![phi], f).unwrap()
}

#[test]
fn torus_flow_preserves_weighted_measure() {
    let flow = TorusFlow::new(1.0, TargetMetric::euclidean(1));
    let mut s = torus_state(128);
    let v0 = s.weighted_volume();
    let dt = 1e-4;
    for _ in 0..20 {
        let r = flow_rates(&s, 1.0, &flow.target).unwrap();
        assert!(r.measure_defect < 1e-10, "{}", r.measure_defect);
        s = flow.step(&s, dt).unwrap();
    }
    let drift = (s.weighted_volume() - v0).abs() / s.time;
    assert!(drift < 1e-8, "drift per unit time {drift:e}");
}
