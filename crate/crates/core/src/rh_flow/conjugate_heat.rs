//! Radial conjugate heat equation `−∂_t u − Δu + (R − α|∇φ|²)u = 0` on a moving
//! disk or annulus, solved backwards in time.
//!
//! The domain `[a(t), b(t)]` is pulled back to `ξ ∈ [0, 1]` by `r = a + ξ(b − a)`;
//! in `s = t_end − t` the problem is forward parabolic and is stepped by
//! Crank–Nicolson.

use crate::conformal_geometry::{phi_pullback, scalar_curvature, AmbientMetric, MapField, TargetMetric};
use crate::error::{GeoError, Result};
use crate::numerics::{tridiag, Jet};
use crate::rh_flow::SelfSimilarBackground;
use std::fmt::Write as _;
use std::sync::Arc;

/// Conformal factor jet and potential `V = R − α|∇φ|²` at `(t, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCoefficients {
    pub factor: Jet,
    pub potential: f64,
}

type CoefficientFn = Arc<dyn Fn(f64, f64) -> Result<RadialCoefficients> + Send + Sync>;
type MotionFn = Arc<dyn Fn(f64) -> (f64, f64, f64, f64) + Send + Sync>;

/// Radially symmetric ambient data for the solver.
#[derive(Clone)]
pub struct RadialMedium {
    pub dim: usize,
    coefficients: CoefficientFn,
}

fn axis_point(m: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0; m];
    x[0] = r;
    x
}

impl RadialMedium {
    pub fn new<F>(dim: usize, rule: F) -> Self
    where
        F: Fn(f64, f64) -> Result<RadialCoefficients> + Send + Sync + 'static,
    {
        RadialMedium { dim, coefficients: Arc::new(rule) }
    }

    /// Time-independent medium from a metric and map.
    pub fn from_metric(metric: AmbientMetric, map: MapField, target: TargetMetric, alpha: f64) -> Self {
        let m = metric.dim();
        RadialMedium::new(m, move |_, r| {
            let x = axis_point(m, r);
            let (_, energy) = phi_pullback(&map, &target, &metric, &x)?;
            Ok(RadialCoefficients {
                factor: metric.factor().eval_positive(r)?,
                potential: scalar_curvature(&metric, &x)? - alpha * energy,
            })
        })
    }

    /// Medium given by the slices of a self-similar background.
    pub fn from_background(bg: SelfSimilarBackground) -> Self {
        let m = bg.dim();
        let alpha = bg.params().alpha;
        RadialMedium::new(m, move |t, r| {
            let s = bg.slice(t)?;
            let x = axis_point(m, r);
            let (_, energy) = phi_pullback(&s.map, bg.target(), &s.metric, &x)?;
            Ok(RadialCoefficients {
                factor: s.metric.factor().eval_positive(r)?,
                potential: scalar_curvature(&s.metric, &x)? - alpha * energy,
            })
        })
    }

    pub fn at(&self, t: f64, r: f64) -> Result<RadialCoefficients> {
        (self.coefficients)(t, r)
    }
}

/// Motion of the domain ends: returns `(a, ȧ, b, ḃ)`.
#[derive(Clone)]
pub struct DomainMotion(MotionFn);

impl DomainMotion {
    pub fn fixed(a: f64, b: f64) -> Self {
        DomainMotion(Arc::new(move |_| (a, 0.0, b, 0.0)))
    }

    pub fn new<F: Fn(f64) -> (f64, f64, f64, f64) + Send + Sync + 'static>(rule: F) -> Self {
        DomainMotion(Arc::new(rule))
    }

    /// Disk of radius `R(t) = √(R₀² − 2(m−1)(t − t₀))`, the Euclidean shrinking sphere.
    pub fn euclidean_shrinking(m: usize, r0: f64, t0: f64) -> Self {
        let k = 2.0 * (m as f64 - 1.0);
        DomainMotion(Arc::new(move |t| {
            let r = (r0 * r0 - k * (t - t0)).sqrt();
            (0.0, 0.0, r, -0.5 * k / r)
        }))
    }

    pub fn at(&self, t: f64) -> (f64, f64, f64, f64) {
        (self.0)(t)
    }
}

/// Boundary condition at one end of the radial interval.
#[derive(Clone)]
pub enum BoundaryRule {
    /// Origin of a disk: `u_r = 0`.
    Regular,
    /// `e₀u = H u` with `e₀` the inward unit normal of the domain; the closure
    /// returns the mean curvature of the boundary sphere w.r.t. that normal.
    Robin(Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>),
    Dirichlet(f64),
}

impl BoundaryRule {
    /// Robin data from the sphere formula in a time-independent metric.
    /// `outer` selects the normal pointing toward the origin.
    pub fn robin_from_metric(metric: &AmbientMetric, outer: bool) -> Self {
        let factor = metric.factor().clone();
        let m = metric.dim() as f64;
        BoundaryRule::Robin(Arc::new(move |_, r| {
            let j = factor.eval_positive(r)?;
            let h = (m - 1.0) * (j.value / r - j.d1);
            Ok(if outer { h } else { -h })
        }))
    }

    pub fn neumann() -> Self {
        BoundaryRule::Robin(Arc::new(|_, _| Ok(0.0)))
    }
}

#[derive(Clone)]
pub struct ConjugateHeatProblem {
    pub medium: RadialMedium,
    pub domain: DomainMotion,
    pub inner: BoundaryRule,
    pub outer: BoundaryRule,
}

/// Solution on one time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateHeatState {
    pub time: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

impl ConjugateHeatState {
    pub fn mass(&self, medium: &RadialMedium) -> Result<f64> {
        let m = medium.dim;
        let omega = unit_sphere_area(m);
        let dens = self
            .r
            .iter()
            .zip(&self.u)
            .map(|(r, u)| Ok(u * medium.at(self.time, *r)?.factor.value.powi(-(m as i32)) * r.powi(m as i32 - 1)))
            .collect::<Result<Vec<f64>>>()?;
        let h = self.r[1] - self.r[0];
        Ok(omega * crate::numerics::quadrature::simpson_uniform(&dens, h))
    }
}

/// Area of the unit sphere `S^{m−1}`.
pub fn unit_sphere_area(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI / (m as f64 - 2.0) * unit_sphere_area(m - 2),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateHeatTrajectory {
    /// Slices ordered by decreasing time (solver order).
    pub states: Vec<ConjugateHeatState>,
    pub nodes: usize,
    pub ds: f64,
}

impl ConjugateHeatTrajectory {
    /// Slice whose time matches `t` up to a fraction of the step.
    pub fn at_time(&self, t: f64) -> Option<&ConjugateHeatState> {
        self.states.iter().find(|s| (s.time - t).abs() < 1e-6 * self.ds)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,r,u\n");
        for s in &self.states {
            for (r, u) in s.r.iter().zip(&s.u) {
                let _ = writeln!(out, "{:.17e},{:.17e},{:.17e}", s.time, r, u);
            }
        }
        out
    }
}

struct Rows {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    potential: Vec<f64>,
}

impl ConjugateHeatProblem {
    /// Spatial operator `A` (so that `U_s = A U`) at time `t`, with the
    /// potential split off for the integrating factor.
    fn rows(&self, t: f64, nodes: usize) -> Result<Rows> {
        let (a, da, b, db) = self.domain.at(t);
        let len = b - a;
        if !(len > 0.0) || a < 0.0 {
            return Err(GeoError::Domain(format!("ill-posed domain [{a}, {b}] at t = {t}")));
        }
        let m = self.medium.dim as f64;
        let n = nodes - 1;
        let dxi = 1.0 / n as f64;
        let hh = len * dxi;
        let mut rows = Rows {
            lower: vec![0.0; nodes],
            diag: vec![0.0; nodes],
            upper: vec![0.0; nodes],
            potential: vec![0.0; nodes],
        };
        for i in 0..nodes {
            let xi = i as f64 * dxi;
            let r = a + xi * len;
            let origin = i == 0 && matches!(self.inner, BoundaryRule::Regular);
            let c = self.medium.at(t, if origin { 0.0 } else { r })?;
            rows.potential[i] = c.potential;
            let f = c.factor.value;
            let d = f * f;
            if origin {
                if a != 0.0 {
                    return Err(GeoError::Precondition("regular inner boundary needs a(t) = 0".into()));
                }
                rows.diag[i] = -2.0 * m * d / (hh * hh);
                rows.upper[i] = 2.0 * m * d / (hh * hh);
                continue;
            }
            let beta = d * ((m - 1.0) / r + (2.0 - m) * c.factor.d1 / f) - (da + xi * (db - da));
            let diff = d / (hh * hh);
            let adv = beta / (2.0 * hh);
            let at_end = if i == 0 { Some((&self.inner, 1.0)) } else if i == n { Some((&self.outer, -1.0)) } else { None };
            match at_end {
                None => {
                    rows.lower[i] = diff - adv;
                    rows.diag[i] = -2.0 * diff;
                    rows.upper[i] = diff + adv;
                }
                Some((BoundaryRule::Dirichlet(_), _)) => {}
                Some((BoundaryRule::Regular, _)) => {
                    return Err(GeoError::Precondition("regular condition only applies at the origin".into()));
                }
                Some((BoundaryRule::Robin(hfun), dir)) => {
                    // dir·F·u_r = H u, with dir = +1 at the inner end and −1 at the outer end.
                    let h = hfun(t, r)?;
                    let slope = dir * h / f;
                    let neighbour = 2.0 * diff;
                    let centre = -2.0 * diff - dir * 2.0 * hh * slope * diff + beta * slope;
                    rows.diag[i] = centre;
                    if i == 0 {
                        rows.upper[i] = neighbour;
                    } else {
                        rows.lower[i] = neighbour;
                    }
                }
            }
        }
        Ok(rows)
    }

    fn node_radii(&self, t: f64, nodes: usize) -> Vec<f64> {
        let (a, _, b, _) = self.domain.at(t);
        (0..nodes).map(|i| a + (b - a) * i as f64 / (nodes - 1) as f64).collect()
    }

    /// Solves backwards from `t_end` (terminal data `terminal(r)`) to `t_start`
    /// with `steps` uniform steps on `nodes` radial nodes.
    pub fn solve<F: Fn(f64) -> f64>(
        &self,
        terminal: F,
        t_start: f64,
        t_end: f64,
        nodes: usize,
        steps: usize,
    ) -> Result<ConjugateHeatTrajectory> {
        if nodes < 3 || steps == 0 || !(t_end > t_start) {
            return Err(GeoError::Precondition("need nodes ≥ 3, steps ≥ 1 and t_end > t_start".into()));
        }
        let ds = (t_end - t_start) / steps as f64;
        let r0 = self.node_radii(t_end, nodes);
        let mut u: Vec<f64> = r0.iter().map(|r| terminal(*r)).collect();
        if u.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(GeoError::Precondition("terminal data must be finite and non-negative".into()));
        }
        self.apply_dirichlet(&mut u);
        let mut states = vec![ConjugateHeatState { time: t_end, r: r0, u: u.clone() }];
        let mut rows = self.rows(t_end, nodes)?;
        for k in 1..=steps {
            let t_next = t_end - k as f64 * ds;
            let next = self.rows(t_next, nodes)?;
            // Integrating factor for the grid-mean potential keeps constant-V
            // problems exact.
            let mean_now = rows.potential.iter().sum::<f64>() / nodes as f64;
            let mean_next = next.potential.iter().sum::<f64>() / nodes as f64;
            let decay = (-0.5 * ds * (mean_now + mean_next)).exp();
            let mut rhs = vec![0.0; nodes];
            for i in 0..nodes {
                let mut au = rows.diag[i] * u[i] - (rows.potential[i] - mean_now) * u[i];
                if i > 0 {
                    au += rows.lower[i] * u[i - 1];
                }
                if i + 1 < nodes {
                    au += rows.upper[i] * u[i + 1];
                }
                rhs[i] = (u[i] + 0.5 * ds * au) * decay;
            }
            let lower: Vec<f64> = (0..nodes).map(|i| -0.5 * ds * next.lower[i]).collect();
            let upper: Vec<f64> = (0..nodes).map(|i| -0.5 * ds * next.upper[i]).collect();
            let mut diag: Vec<f64> =
                (0..nodes).map(|i| 1.0 - 0.5 * ds * (next.diag[i] - (next.potential[i] - mean_next))).collect();
            for (end, i) in [(&self.inner, 0), (&self.outer, nodes - 1)] {
                if let BoundaryRule::Dirichlet(v) = end {
                    diag[i] = 1.0;
                    rhs[i] = *v;
                }
            }
            let mut lo = lower;
            let mut up = upper;
            if matches!(self.inner, BoundaryRule::Dirichlet(_)) {
                up[0] = 0.0;
            }
            if matches!(self.outer, BoundaryRule::Dirichlet(_)) {
                lo[nodes - 1] = 0.0;
            }
            u = tridiag::solve(&lo, &diag, &up, &rhs)?;
            let scale = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if u.iter().any(|v| !v.is_finite() || *v < -1e-12 * scale) {
                return Err(GeoError::Positivity { step: k });
            }
            states.push(ConjugateHeatState { time: t_next, r: self.node_radii(t_next, nodes), u: u.clone() });
            rows = next;
        }
        Ok(ConjugateHeatTrajectory { states, nodes, ds })
    }

    fn apply_dirichlet(&self, u: &mut [f64]) {
        let n = u.len();
        if let BoundaryRule::Dirichlet(v) = self.inner {
            u[0] = v;
        }
        if let BoundaryRule::Dirichlet(v) = self.outer {
            u[n - 1] = v;
        }
    }
}

/// Convenience entry point matching the solver's usual call shape.
pub fn conjugate_heat_solve_radial<F: Fn(f64) -> f64>(
    problem: &ConjugateHeatProblem,
    terminal: F,
    t_start: f64,
    t_end: f64,
    nodes: usize,
    steps: usize,
) -> Result<ConjugateHeatTrajectory> {
    problem.solve(terminal, t_start, t_end, nodes, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal_geometry::RadialProfile;

    fn euclidean(m: usize) -> RadialMedium {
        RadialMedium::from_metric(AmbientMetric::euclidean(m), MapField::Constant(vec![0.0]), TargetMetric::euclidean(1), 0.0)
    }

    #[test]
    fn zero_terminal_data_stays_zero() {
        let p = ConjugateHeatProblem {
            medium: euclidean(2),
            domain: DomainMotion::fixed(0.0, 1.0),
            inner: BoundaryRule::Regular,
            outer: BoundaryRule::neumann(),
        };
        let tr = p.solve(|_| 0.0, 0.0, 1.0, 33, 10).unwrap();
        assert!(tr.states.last().unwrap().u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_curvature_reduces_to_exponential() {
        let metric = AmbientMetric::new(3, RadialProfile::RoundSphereChart).unwrap();
        let p = ConjugateHeatProblem {
            medium: RadialMedium::from_metric(metric.clone(), MapField::Constant(vec![0.0]), TargetMetric::euclidean(1), 0.0),
            domain: DomainMotion::fixed(0.0, 1.0),
            inner: BoundaryRule::Regular,
            outer: BoundaryRule::robin_from_metric(&metric, true),
        };
        let tr = p.solve(|_| 2.0, 0.0, 0.5, 65, 50).unwrap();
        for s in &tr.states {
            let expect = 2.0 * (-6.0 * (0.5 - s.time)).exp();
            assert!(s.u.iter().all(|v| (v - expect).abs() < 1e-10 * expect));
        }
    }

    #[test]
    fn sphere_area() {
        assert!((unit_sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
