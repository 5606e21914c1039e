use crate::conformal_geometry::{
    grad_laplacian, norm, AmbientMetric, MapField, PointJet, RadialProfile, ScalarField, TargetMetric,
};
use crate::error::{GeoError, Result};
use crate::numerics::Rk45;
use crate::soliton_ode::{cartesian_residual, SolitonClass, SolitonParams};
use crate::verify::{FdReport, Gate, Resolution};
use nalgebra::DMatrix;
use std::sync::Arc;

/// Tolerance on the tensorial soliton residual accepted for a base triple.
pub const BASE_RESIDUAL_TOL: f64 = 1e-8;

/// How the generating flow ψ_t acts, as detected from the base data.
#[derive(Debug, Clone, PartialEq)]
pub enum Motion {
    Identity,
    /// `∇_g f = rate · x`, so ψ_t is a dilation.
    Dilation { rate: f64 },
    /// `∇_g f` is a constant vector, so ψ_t is a translation.
    Translation { velocity: Vec<f64> },
    General,
}

/// The self-similar solution `ḡ(t) = σ(t)ψ_t*g`, `φ̄ = ψ_t*φ`, `f̄ = ψ_t*f`.
#[derive(Debug, Clone)]
pub struct SelfSimilarBackground {
    metric: AmbientMetric,
    target: TargetMetric,
    map: MapField,
    potential: ScalarField,
    params: SolitonParams,
    motion: Motion,
    tracer: Rk45,
    chart_radius: f64,
}

/// One time slice of a background, in the same representation as the base data.
#[derive(Debug, Clone)]
pub struct BackgroundSlice {
    pub time: f64,
    pub sigma: f64,
    pub metric: AmbientMetric,
    pub map: MapField,
    pub potential: ScalarField,
}

fn sample_points(m: usize) -> Vec<Vec<f64>> {
    [0.35, 0.9, 1.7]
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let dir: Vec<f64> = (0..m).map(|i| 1.0 + 0.3 * ((i + k) % 3) as f64).collect();
            let n = norm(&dir);
            dir.iter().map(|d| r * d / n).collect()
        })
        .collect()
}

fn detect_motion(metric: &AmbientMetric, potential: &ScalarField) -> Motion {
    if potential.is_constant() {
        return Motion::Identity;
    }
    match potential {
        ScalarField::Affine { coeffs, .. } if metric.factor().is_constant() => {
            let c = metric.factor().value(0.0);
            Motion::Translation { velocity: coeffs.iter().map(|v| c * c * v).collect() }
        }
        ScalarField::Radial(p) => {
            let rate = |r: f64| {
                let fj = metric.factor().eval(r);
                fj.value * fj.value * p.eval(r).d1 / r
            };
            let c = rate(0.3);
            let constant = [0.7, 1.3, 2.9, 5.0].iter().all(|r| (rate(*r) - c).abs() <= 1e-12 * c.abs().max(1.0));
            if constant { Motion::Dilation { rate: c } } else { Motion::General }
        }
        _ => Motion::General,
    }
}

pub(crate) fn dilate_scalar(f: &ScalarField, s: f64) -> ScalarField {
    match f {
        ScalarField::Constant(_) => f.clone(),
        ScalarField::Radial(p) => ScalarField::Radial(RadialProfile::Scaled { base: Box::new(p.clone()), inner: s, outer: 1.0 }),
        ScalarField::Affine { coeffs, offset } => {
            ScalarField::Affine { coeffs: coeffs.iter().map(|c| c * s).collect(), offset: *offset }
        }
        ScalarField::Custom { name, rule } => {
            let rule = Arc::clone(rule);
            ScalarField::custom(name, move |x| {
                let y: Vec<f64> = x.iter().map(|v| v * s).collect();
                let j = rule(&y);
                PointJet { value: j.value, grad: j.grad.iter().map(|g| g * s).collect(), hess: j.hess * (s * s) }
            })
        }
    }
}

pub(crate) fn translate_scalar(f: &ScalarField, shift: &[f64]) -> ScalarField {
    match f {
        ScalarField::Constant(_) => f.clone(),
        ScalarField::Affine { coeffs, offset } => ScalarField::Affine {
            coeffs: coeffs.clone(),
            offset: offset + coeffs.iter().zip(shift).map(|(c, v)| c * v).sum::<f64>(),
        },
        other => {
            let base = other.clone();
            let shift = shift.to_vec();
            ScalarField::custom("translated", move |x| {
                let y: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
                base.jet(&y).unwrap_or_else(|_| PointJet::constant(f64::NAN, x.len()))
            })
        }
    }
}

fn map_components(map: &MapField) -> Vec<ScalarField> {
    match map {
        MapField::Constant(v) => v.iter().map(|c| ScalarField::Constant(*c)).collect(),
        MapField::Radial { profile, direction, base } => direction
            .iter()
            .enumerate()
            .map(|(a, d)| {
                let p = profile.clone();
                let (d, b) = (*d, base.get(a).copied().unwrap_or(0.0));
                ScalarField::Radial(RadialProfile::custom("map component", p.smooth_at_origin(), move |r| {
                    let j = p.eval(r);
                    crate::numerics::Jet::new(b + d * j.value, d * j.d1, d * j.d2)
                }))
            })
            .collect(),
        MapField::Affine { matrix, offset } => (0..matrix.nrows())
            .map(|a| ScalarField::Affine { coeffs: matrix.row(a).iter().copied().collect(), offset: offset[a] })
            .collect(),
        MapField::Components(c) => c.clone(),
    }
}

pub(crate) fn dilate_map(map: &MapField, s: f64) -> MapField {
    match map {
        MapField::Constant(_) => map.clone(),
        MapField::Radial { profile, direction, base } => MapField::Radial {
            profile: RadialProfile::Scaled { base: Box::new(profile.clone()), inner: s, outer: 1.0 },
            direction: direction.clone(),
            base: base.clone(),
        },
        MapField::Affine { matrix, offset } => MapField::Affine { matrix: matrix * s, offset: offset.clone() },
        MapField::Components(c) => MapField::Components(c.iter().map(|f| dilate_scalar(f, s)).collect()),
    }
}

pub(crate) fn translate_map(map: &MapField, shift: &[f64]) -> MapField {
    match map {
        MapField::Constant(_) => map.clone(),
        MapField::Affine { matrix, offset } => {
            let v = DMatrix::from_column_slice(shift.len(), 1, shift);
            let moved = matrix * v;
            MapField::Affine { matrix: matrix.clone(), offset: offset.iter().zip(moved.iter()).map(|(a, b)| a + b).collect() }
        }
        other => MapField::Components(map_components(other).iter().map(|f| translate_scalar(f, shift)).collect()),
    }
}

impl SelfSimilarBackground {
    /// Builds a background after checking that the base triple solves the
    /// soliton equations at a few sample points.
    pub fn new(
        metric: AmbientMetric,
        target: TargetMetric,
        map: MapField,
        potential: ScalarField,
        params: SolitonParams,
    ) -> Result<Self> {
        for x in sample_points(metric.dim()) {
            let (e1, e2) = cartesian_residual(&metric, &target, &potential, &map, &params, &x)?;
            let worst = e2.iter().fold(e1.max_abs(), |a, v| a.max(v.abs()));
            if !(worst <= BASE_RESIDUAL_TOL) {
                return Err(GeoError::Precondition(format!(
                    "base data is not a {:?} soliton: residual {worst:.3e} at {x:?}",
                    params.class
                )));
            }
        }
        let motion = detect_motion(&metric, &potential);
        Ok(SelfSimilarBackground {
            metric,
            target,
            map,
            potential,
            params,
            motion,
            tracer: Rk45::default(),
            chart_radius: f64::INFINITY,
        })
    }

    /// Euclidean Gaussian shrinker `f = |x|²/4` with horizon `T`.
    pub fn gaussian(m: usize, horizon: f64) -> Result<Self> {
        Self::new(
            AmbientMetric::euclidean(m),
            TargetMetric::euclidean(1),
            MapField::Constant(vec![0.0]),
            ScalarField::Radial(RadialProfile::Quadratic { c0: 0.0, c2: 0.25 }),
            SolitonParams::new(SolitonClass::Shrinking, 0.0, horizon)?,
        )
    }

    /// Hamilton's cigar `g = (1+r²)⁻¹δ`, `f = −log(1+r²)`.
    pub fn cigar() -> Result<Self> {
        Self::new(
            AmbientMetric::new(2, RadialProfile::Cigar)?,
            TargetMetric::euclidean(1),
            MapField::Constant(vec![0.0]),
            ScalarField::Radial(RadialProfile::LogOnePlusSquare { scale: -1.0 }),
            SolitonParams::steady(0.0),
        )
    }

    /// Euclidean steady background with affine potential `f = c·x`.
    pub fn linear(coeffs: Vec<f64>) -> Result<Self> {
        let m = coeffs.len();
        Self::new(
            AmbientMetric::euclidean(m),
            TargetMetric::euclidean(1),
            MapField::Constant(vec![0.0]),
            ScalarField::Affine { coeffs, offset: 0.0 },
            SolitonParams::steady(0.0),
        )
    }

    pub fn with_chart_radius(mut self, radius: f64) -> Self {
        self.chart_radius = radius;
        self
    }

    pub fn with_tracer(mut self, tracer: Rk45) -> Self {
        self.tracer = tracer;
        self
    }

    pub fn metric(&self) -> &AmbientMetric {
        &self.metric
    }
    pub fn target(&self) -> &TargetMetric {
        &self.target
    }
    pub fn map(&self) -> &MapField {
        &self.map
    }
    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }
    pub fn params(&self) -> &SolitonParams {
        &self.params
    }
    pub fn motion(&self) -> &Motion {
        &self.motion
    }
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn sigma(&self, t: f64) -> f64 {
        self.params.sigma(t)
    }

    /// `∫ dt/σ` from the identity time to `t`.
    fn reduced_time(&self, t: f64) -> f64 {
        let p = &self.params;
        match p.class {
            SolitonClass::Steady => t,
            SolitonClass::Shrinking => -(p.horizon - t).ln(),
            SolitonClass::Expanding => (t - p.horizon).ln(),
        }
    }

    /// Generating vector field `∇_g f / σ(t)` at `x`.
    pub fn velocity(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        if norm(x) > self.chart_radius {
            return Err(GeoError::Domain(format!("trajectory left the chart at {x:?}")));
        }
        let gl = grad_laplacian(&self.metric, &self.potential, x)?;
        let s = self.sigma(t);
        Ok(gl.grad.iter().map(|v| v / s).collect())
    }

    /// Moves a point along the generating flow from time `from` to time `to`,
    /// i.e. applies `ψ_to ∘ ψ_from⁻¹`.
    pub fn transport(&self, x: &[f64], from: f64, to: f64) -> Result<Vec<f64>> {
        self.params.check_time(from)?;
        self.params.check_time(to)?;
        if self.motion == Motion::Identity || from == to {
            return Ok(x.to_vec());
        }
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy.copy_from_slice(&self.velocity(y, t)?);
            Ok(())
        };
        self.tracer.solve_to(rhs, from, x, to)
    }

    /// `ψ_t(x)`.
    pub fn diffeo_flow(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        self.transport(x, self.params.identity_time(), t)
    }

    /// `ψ_t⁻¹(x)`, by reverse-time integration.
    pub fn diffeo_flow_inverse(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        self.transport(x, t, self.params.identity_time())
    }

    /// Closed-form slice for dilation and translation motions.
    pub fn slice(&self, t: f64) -> Result<BackgroundSlice> {
        self.params.check_time(t)?;
        let sigma = self.sigma(t);
        let root = sigma.sqrt();
        let tau = self.reduced_time(t);
        let (factor, map, potential) = match &self.motion {
            Motion::Identity => (
                RadialProfile::Scaled { base: Box::new(self.metric.factor().clone()), inner: 1.0, outer: 1.0 / root },
                self.map.clone(),
                self.potential.clone(),
            ),
            Motion::Dilation { rate } => {
                let s = (rate * tau).exp();
                (
                    RadialProfile::Scaled { base: Box::new(self.metric.factor().clone()), inner: s, outer: 1.0 / (s * root) },
                    dilate_map(&self.map, s),
                    dilate_scalar(&self.potential, s),
                )
            }
            Motion::Translation { velocity } => {
                let shift: Vec<f64> = velocity.iter().map(|v| v * tau).collect();
                (
                    RadialProfile::Scaled { base: Box::new(self.metric.factor().clone()), inner: 1.0, outer: 1.0 / root },
                    translate_map(&self.map, &shift),
                    translate_scalar(&self.potential, &shift),
                )
            }
            Motion::General => {
                return Err(GeoError::Precondition(
                    "pullback by a non-conformal ψ has no conformal-factor representation".into(),
                ))
            }
        };
        Ok(BackgroundSlice { time: t, sigma, metric: AmbientMetric::new(self.dim(), factor)?, map, potential })
    }

    /// `(F̄(x), φ̄(x), f̄(x))` at time `t`.
    pub fn background_eval(&self, t: f64, x: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
        let s = self.slice(t)?;
        Ok((s.metric.factor_at(x)?, s.map.jet(x)?.value, s.potential.value(x)?))
    }

    /// `f̄(t, x) = f(ψ_t(x))` by tracing, independent of [`Self::slice`].
    pub fn potential_by_tracing(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.potential.value(&self.diffeo_flow(x, t)?)
    }

    /// Compares `∂_t f̄` (central difference) with `|∇_ḡ f̄|²`.
    pub fn check_potential_evolution(&self, t: f64, x: &[f64], dt: f64) -> Result<FdReport> {
        let fp = self.slice(t + dt)?.potential.value(x)?;
        let fm = self.slice(t - dt)?.potential.value(x)?;
        let now = self.slice(t)?;
        let rhs = grad_laplacian(&now.metric, &now.potential, x)?.grad_norm_sq;
        Ok(FdReport::scalar(
            "potential_evolution",
            (fp - fm) / (2.0 * dt),
            rhs,
            1e-6,
            Gate::Relative,
            Resolution::default().dt(dt),
        ))
    }
}

impl BackgroundSlice {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }
}

/// Time-dependent ambient data as seen by surface-level computations.
pub trait Background {
    fn slice_at(&self, t: f64) -> Result<BackgroundSlice>;
    fn target(&self) -> &TargetMetric;
    /// Whether the data is a gradient steady soliton.
    fn is_steady_soliton(&self) -> bool;
    fn alpha(&self) -> f64;
}

impl Background for SelfSimilarBackground {
    fn slice_at(&self, t: f64) -> Result<BackgroundSlice> {
        self.slice(t)
    }
    fn target(&self) -> &TargetMetric {
        &self.target
    }
    fn is_steady_soliton(&self) -> bool {
        self.params.class == SolitonClass::Steady
    }
    fn alpha(&self) -> f64 {
        self.params.alpha
    }
}

/// Time-independent metric, map and weight potential with no soliton structure.
#[derive(Debug, Clone)]
pub struct StaticBackground {
    pub metric: AmbientMetric,
    pub target: TargetMetric,
    pub map: MapField,
    pub potential: ScalarField,
    pub alpha: f64,
}

impl StaticBackground {
    /// Metric only; constant map and zero potential.
    pub fn plain(metric: AmbientMetric) -> Self {
        StaticBackground {
            metric,
            target: TargetMetric::euclidean(1),
            map: MapField::Constant(vec![0.0]),
            potential: ScalarField::Constant(0.0),
            alpha: 0.0,
        }
    }
}

impl Background for StaticBackground {
    fn slice_at(&self, t: f64) -> Result<BackgroundSlice> {
        Ok(BackgroundSlice {
            time: t,
            sigma: 1.0,
            metric: self.metric.clone(),
            map: self.map.clone(),
            potential: self.potential.clone(),
        })
    }
    fn target(&self) -> &TargetMetric {
        &self.target
    }
    fn is_steady_soliton(&self) -> bool {
        false
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_potential_is_static() {
        let bg = SelfSimilarBackground::new(
            AmbientMetric::euclidean(2),
            TargetMetric::euclidean(1),
            MapField::Constant(vec![1.0]),
            ScalarField::Constant(3.0),
            SolitonParams::steady(0.0),
        )
        .unwrap();
        assert_eq!(bg.diffeo_flow(&[0.3, 0.4], 5.0).unwrap(), vec![0.3, 0.4]);
        let (f, phi, pot) = bg.background_eval(2.0, &[0.3, 0.4]).unwrap();
        assert_eq!((f, phi, pot), (1.0, vec![1.0], 3.0));
    }

    #[test]
    fn rejects_non_soliton_base() {
        let r = SelfSimilarBackground::new(
            AmbientMetric::euclidean(2),
            TargetMetric::euclidean(1),
            MapField::Constant(vec![0.0]),
            ScalarField::Radial(RadialProfile::Quadratic { c0: 0.0, c2: 1.0 }),
            SolitonParams::steady(0.0),
        );
        assert!(matches!(r, Err(GeoError::Precondition(_))));
    }

    #[test]
    fn motions_are_detected() {
        assert_eq!(SelfSimilarBackground::gaussian(3, 1.0).unwrap().motion(), &Motion::Dilation { rate: 0.5 });
        assert_eq!(SelfSimilarBackground::cigar().unwrap().motion(), &Motion::Dilation { rate: -2.0 });
        assert_eq!(
            SelfSimilarBackground::linear(vec![1.0, 0.0]).unwrap().motion(),
            &Motion::Translation { velocity: vec![1.0, 0.0] }
        );
    }

    #[test]
    fn gaussian_slice_matches_closed_form() {
        let bg = SelfSimilarBackground::gaussian(2, 1.0).unwrap();
        for t in [0.0, 0.5, 0.9] {
            let (f, _, pot) = bg.background_eval(t, &[1.0, 0.5]).unwrap();
            assert!((f - 1.0).abs() < 1e-14);
            assert!((pot - 1.25 / (4.0 * (1.0 - t))).abs() < 1e-14);
        }
    }

    #[test]
    fn time_window_enforced() {
        let bg = SelfSimilarBackground::gaussian(2, 1.0).unwrap();
        assert!(bg.diffeo_flow(&[1.0, 0.0], 1.5).is_err());
        assert!(bg.slice(1.0).is_err());
    }
}
