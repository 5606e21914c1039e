//! Finite-difference checks of the evolution identities along curve families,
//! the Huisken monotonicity identity, the weighted functional's time derivative
//! and the restricted translating-soliton equations.

use super::{FdReport, Gate, Resolution};
use crate::conformal_geometry::{AmbientMetric, MapField, TargetMetric};
use crate::error::{GeoError, Result};
use crate::functionals::{f_alpha_radial, fixed_label_rate, frame_terms, thm1_rhs, RadialBoundary, RadialData, Thm1Rhs, WeightedAreaSeries};
use crate::mcf::{curve_geometry, interior_range, label_derivatives, CurveGeometry, Hypersurface, PlaneCurve, SolitonFamily};
use crate::rh_flow::{Background, BackgroundSlice, BoundaryRule, ConjugateHeatProblem, DomainMotion, RadialMedium};
use std::sync::Arc;

/// `log(e_coarse / e_fine) / log(refinement)`.
pub fn observed_order(coarse_err: f64, fine_err: f64, refinement: f64) -> f64 {
    (coarse_err / fine_err).ln() / refinement.ln()
}

/// First and second derivatives of per-vertex samples in `g`-arclength.
fn arc_derivatives(values: &[f64], geo: &CurveGeometry, closed: bool) -> (Vec<f64>, Vec<f64>) {
    let (d1, d2) = label_derivatives(values, closed);
    let (dl, _) = label_derivatives(&geo.line_element, closed);
    let first = (0..values.len()).map(|i| d1[i] / geo.line_element[i]).collect();
    let second = (0..values.len())
        .map(|i| {
            let l = geo.line_element[i];
            (d2[i] / l - d1[i] * dl[i] / (l * l)) / l
        })
        .collect();
    (first, second)
}

fn curve_of<'a>(family: &'a SolitonFamily, k: usize) -> Result<&'a PlaneCurve> {
    family
        .surfaces
        .get(k)
        .and_then(Hypersurface::as_curve)
        .ok_or_else(|| GeoError::Precondition("evolution checks need a plane curve family".into()))
}

fn snapshot_resolution(family: &SolitonFamily, k: usize, curve: &PlaneCurve) -> Resolution {
    let dt = family.times.get(k + 1).map(|t| t - family.times[k]).unwrap_or(0.0);
    let h = curve.spacings().iter().sum::<f64>() / curve.spacings().len() as f64;
    Resolution::default().dt(dt).h(h).n(curve.len())
}

struct CurveSnapshot {
    curve: PlaneCurve,
    geo: CurveGeometry,
    frame: Vec<crate::functionals::FrameTerms>,
    alpha: f64,
    interior: std::ops::Range<usize>,
}

fn snapshot<B: Background + ?Sized>(family: &SolitonFamily, bg: &B, k: usize) -> Result<(CurveSnapshot, BackgroundSlice)> {
    let curve = curve_of(family, k)?.clone();
    let slice = bg.slice_at(family.times[k])?;
    let geo = curve_geometry(&curve, &slice.metric)?;
    let frame = frame_terms(curve.points(), &geo, &slice.metric, &slice.map, bg.target())?;
    let interior = interior_range(&curve);
    Ok((CurveSnapshot { curve, geo, frame, alpha: bg.alpha(), interior }, slice))
}

fn line_element_of(s: &Hypersurface, slice: &BackgroundSlice) -> Result<CurveGeometry> {
    let c = s.as_curve().ok_or_else(|| GeoError::Precondition("mixed family".into()))?;
    curve_geometry(c, &slice.metric)
}

/// `∂_t g_σσ = −2(R_σσ − α γ(∂_σφ, ∂_σφ)) − 2H𝒜_σσ` for the induced metric
/// coefficient `g_σσ = (ds_g/dσ)²` at fixed label.
pub fn check_metric_evolution<B: Background + ?Sized>(family: &SolitonFamily, bg: &B, k: usize, tol: f64) -> Result<FdReport> {
    let lhs = fixed_label_rate(family, bg, k, |s, slice| {
        Ok(line_element_of(s, slice)?.line_element.iter().map(|l| l * l).collect())
    })?;
    let (snap, _) = snapshot(family, bg, k)?;
    let rhs: Vec<f64> = (0..snap.curve.len())
        .map(|i| {
            let g = snap.geo.line_element[i].powi(2);
            let h = snap.geo.mean_curvature[i];
            let fr = &snap.frame[i];
            -2.0 * (fr.ric_tt - snap.alpha * fr.map_tangent_sq) * g - 2.0 * h * h * g
        })
        .collect();
    let r = snap.interior.clone();
    Ok(FdReport::vector(
        "metric_evolution",
        lhs[r.clone()].to_vec(),
        rhs[r].to_vec(),
        tol,
        Gate::Relative,
        snapshot_resolution(family, k, &snap.curve),
    ))
}

/// `∂_tH = Δ̂H + 2𝒜^{ij}R_ij + |𝒜|²H + ∇₀R₀₀ − 2α𝒜(∇̂φ, ∇̂φ)` at fixed label.
///
/// In two dimensions `Ric = K g`, so `∇₀R₀₀ = e₀(K) = ½e₀(R)`.
pub fn check_h_evolution<B: Background + ?Sized>(family: &SolitonFamily, bg: &B, k: usize, tol: f64) -> Result<FdReport> {
    let lhs = fixed_label_rate(family, bg, k, |s, slice| s.mean_curvature(&slice.metric))?;
    let (snap, _) = snapshot(family, bg, k)?;
    let (_, h_ss) = arc_derivatives(&snap.geo.mean_curvature, &snap.geo, snap.curve.is_closed());
    let rhs: Vec<f64> = (0..snap.curve.len())
        .map(|i| {
            let h = snap.geo.mean_curvature[i];
            let fr = &snap.frame[i];
            h_ss[i] + 2.0 * h * fr.ric_tt + h * h * h + 0.5 * fr.normal_scalar_slope
                - 2.0 * snap.alpha * h * fr.map_tangent_sq
        })
        .collect();
    let r = snap.interior.clone();
    Ok(FdReport::vector(
        "H_evolution",
        lhs[r.clone()].to_vec(),
        rhs[r].to_vec(),
        tol,
        Gate::Relative,
        snapshot_resolution(family, k, &snap.curve),
    ))
}

/// `∂_t log dA = −(R^i_i + H² − α|∇̂φ|²)` with the Ricci trace over tangential directions.
pub fn check_area_element<B: Background + ?Sized>(family: &SolitonFamily, bg: &B, k: usize, tol: f64) -> Result<FdReport> {
    let lhs = fixed_label_rate(family, bg, k, |s, slice| {
        Ok(line_element_of(s, slice)?.line_element.iter().map(|l| l.ln()).collect())
    })?;
    let (snap, _) = snapshot(family, bg, k)?;
    let rhs: Vec<f64> = (0..snap.curve.len())
        .map(|i| {
            let h = snap.geo.mean_curvature[i];
            let fr = &snap.frame[i];
            -(fr.ric_tt + h * h - snap.alpha * fr.map_tangent_sq)
        })
        .collect();
    let r = snap.interior.clone();
    Ok(FdReport::vector(
        "area_element",
        lhs[r.clone()].to_vec(),
        rhs[r].to_vec(),
        tol,
        Gate::Relative,
        snapshot_resolution(family, k, &snap.curve),
    ))
}

/// Outcome of the monotonicity check over a recorded series.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// `(t, dΦ/dt by central differences, −prefactor·∫(H + e f̄)²e^{−f̄}dA)`.
    pub rates: Vec<(f64, f64, f64)>,
    /// Largest finite-difference rate; must not exceed the tolerance.
    pub max_rate: f64,
    pub non_increasing: bool,
    /// Whether `Φ` is constant and the residual integral vanishes together.
    pub constancy_consistent: bool,
    pub identity: FdReport,
}

impl MonotonicityReport {
    pub fn pass(&self) -> bool {
        self.non_increasing && self.constancy_consistent && self.identity.pass
    }
}

/// `dΦ/dt ≤ tol_mono`, `dΦ/dt = −prefactor·∫(H + e f̄)²e^{−f̄}dA` to `tol_match`
/// (relative), and `Φ` constant exactly when the residual integral vanishes.
pub fn check_monotonicity(series: &WeightedAreaSeries, tol_mono: f64, tol_match: f64) -> Result<MonotonicityReport> {
    if series.len() < 3 {
        return Err(GeoError::Insufficient(format!("{} samples; need at least 3", series.len())));
    }
    let fd = series.phi_rate();
    let mut rates = Vec::with_capacity(fd.len());
    for (k, (t, rate)) in fd.into_iter().enumerate() {
        rates.push((t, rate, series.predicted_rate(k + 1)?));
    }
    let max_rate = rates.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let constant = rates.iter().all(|r| r.1.abs() <= tol_mono);
    let vanishing = rates.iter().all(|r| r.2.abs() <= tol_mono);
    let dt = series.times[1] - series.times[0];
    let identity = FdReport::vector(
        "monotonicity_identity",
        rates.iter().map(|r| r.1).collect(),
        rates.iter().map(|r| r.2).collect(),
        tol_match,
        if vanishing { Gate::Absolute } else { Gate::Relative },
        Resolution::default().dt(dt),
    );
    Ok(MonotonicityReport { max_rate, non_increasing: max_rate <= tol_mono, constancy_consistent: constant == vanishing, identity, rates })
}

/// Radial disk or annulus data for the weighted functional's time derivative.
#[derive(Clone)]
pub struct Thm1Scenario {
    pub metric: AmbientMetric,
    pub map: MapField,
    pub target: TargetMetric,
    pub alpha: f64,
    pub domain: DomainMotion,
    pub inner: BoundaryRule,
    pub outer: BoundaryRule,
    pub terminal: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub t_start: f64,
    pub t_end: f64,
    pub nodes: usize,
    pub steps: usize,
    pub check_time: f64,
    /// `Δt` of the central difference in solver steps.
    pub offset_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm1Outcome {
    pub report: FdReport,
    pub functional_before: f64,
    pub functional_after: f64,
    pub rhs: Thm1Rhs,
}

/// Mean curvature of the coordinate sphere of radius `r`, w.r.t. the normal into the domain.
fn boundary_mean_curvature(metric: &AmbientMetric, r: f64, outer: bool) -> Result<f64> {
    let jet = metric.factor().eval_positive(r)?;
    let h = (metric.dim() as f64 - 1.0) * (jet.value / r - jet.d1);
    Ok(if outer { h } else { -h })
}

/// Central difference of `F^α_∞` along the conjugate heat weight against the
/// bulk and boundary integrals, for a static radial metric.
pub fn check_thm1(s: &Thm1Scenario, tol: f64, gate: Gate) -> Result<Thm1Outcome> {
    let m = s.metric.dim();
    let (a, a_dot, b, b_dot) = s.domain.at(s.check_time);
    let mut ends = vec![(b, b_dot, true)];
    if a > 0.0 {
        ends.push((a, a_dot, false));
    }
    for &(r, speed, outer) in &ends {
        let f = s.metric.factor().eval_positive(r)?.value;
        let h = boundary_mean_curvature(&s.metric, r, outer)?;
        // Outward radial speed of a sphere moving by H along the inward normal.
        let mcf = if outer { -f * h } else { f * h };
        if (speed - mcf).abs() > 1e-6 * (1.0 + speed.abs()) {
            return Err(GeoError::Precondition(format!("boundary r = {r} moves at {speed}, MCF speed {mcf}")));
        }
        if !s.map.is_constant() {
            let mut x = vec![0.0; m];
            x[0] = r;
            let jac = s.map.jet(&x)?.jac;
            let normal = (0..jac.nrows()).map(|i| jac[(i, 0)].abs()).fold(0.0, f64::max);
            if normal > 1e-8 {
                return Err(GeoError::Precondition(format!("∇₀φ = {normal:e} on the boundary r = {r}")));
            }
        }
    }
    let medium = RadialMedium::from_metric(s.metric.clone(), s.map.clone(), s.target.clone(), s.alpha);
    let problem = ConjugateHeatProblem { medium: medium.clone(), domain: s.domain.clone(), inner: s.inner.clone(), outer: s.outer.clone() };
    let terminal = s.terminal.clone();
    let traj = problem.solve(move |r| terminal(r), s.t_start, s.t_end, s.nodes, s.steps)?;
    let dt = s.offset_steps as f64 * traj.ds;
    let slice = |t: f64| {
        traj.at_time(t).ok_or_else(|| GeoError::Insufficient(format!("no conjugate heat slice at t = {t}")))
    };
    let before = f_alpha_radial(&medium, slice(s.check_time - dt)?)?.total;
    let after = f_alpha_radial(&medium, slice(s.check_time + dt)?)?.total;
    let lhs = (after - before) / (2.0 * dt);

    let mut boundaries = Vec::new();
    for &(r, _, outer) in ends.iter().rev() {
        let radius_at = |t: f64| {
            let (a, _, b, _) = s.domain.at(t);
            if outer { b } else { a }
        };
        let h_at = |j: f64| boundary_mean_curvature(&s.metric, radius_at(s.check_time + j * dt), outer);
        let near = (h_at(1.0)? - h_at(-1.0)?) / (2.0 * dt);
        let far = (h_at(2.0)? - h_at(-2.0)?) / (4.0 * dt);
        boundaries.push(RadialBoundary { radius: r, outer, mean_curvature_rate: (4.0 * near - far) / 3.0 });
    }
    let data = RadialData { metric: &s.metric, map: &s.map, target: &s.target, alpha: s.alpha };
    let rhs = thm1_rhs(&data, slice(s.check_time)?, &boundaries)?;
    let h = (b - a) / (s.nodes - 1) as f64;
    let report = FdReport::scalar("thm1", lhs, rhs.total, tol, gate, Resolution::default().h(h).dt(dt).n(s.nodes));
    Ok(Thm1Outcome { report, functional_before: before, functional_after: after, rhs })
}

/// Both restricted soliton equations on a curve in a steady background:
/// `R_TT + f̄_ss + H² − α|φ_T|² = 0` and `R_T0 − H_s + H f̄_s − α⟨φ_T, φ_0⟩ = 0`,
/// with `s` the `g`-arclength.
pub fn check_translating_soliton_eqs<B: Background + ?Sized>(
    curve: &PlaneCurve,
    bg: &B,
    t: f64,
    tol: f64,
) -> Result<[FdReport; 2]> {
    if !bg.is_steady_soliton() {
        return Err(GeoError::Precondition("restricted soliton equations need a steady background".into()));
    }
    let slice = bg.slice_at(t)?;
    let geo = curve_geometry(curve, &slice.metric)?;
    let frame = frame_terms(curve.points(), &geo, &slice.metric, &slice.map, bg.target())?;
    let alpha = bg.alpha();
    let f: Vec<f64> = curve.points().iter().map(|p| slice.potential.value(p)).collect::<Result<_>>()?;
    let closed = curve.is_closed();
    let (f_s, f_ss) = arc_derivatives(&f, &geo, closed);
    let (h_s, _) = arc_derivatives(&geo.mean_curvature, &geo, closed);
    let r = interior_range(curve);
    let tangential: Vec<f64> = r
        .clone()
        .map(|i| frame[i].ric_tt + f_ss[i] + geo.mean_curvature[i].powi(2) - alpha * frame[i].map_tangent_sq)
        .collect();
    let mixed: Vec<f64> = r
        .clone()
        .map(|i| frame[i].ric_nt - h_s[i] + geo.mean_curvature[i] * f_s[i] - alpha * frame[i].map_cross)
        .collect();
    let zeros = vec![0.0; tangential.len()];
    let h = curve.spacings().iter().sum::<f64>() / curve.spacings().len() as f64;
    let res = Resolution::default().h(h).n(curve.len());
    Ok([
        FdReport::vector("soliton_restricted_tangential", tangential, zeros.clone(), tol, Gate::Absolute, res.clone()),
        FdReport::vector("soliton_restricted_mixed", mixed, zeros, tol, Gate::Absolute, res),
    ])
}
