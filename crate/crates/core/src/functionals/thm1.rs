//! Right side of the time derivative of `F^α_∞` for radial data weighted by a
//! conjugate heat solution `u = e^{−f}` on a disk or annulus with moving boundary.

use super::energy::radial_potential;
use crate::conformal_geometry::{
    hessian_from_jets, pullback_from_jet, ricci, scalar_curvature, tension_from_jets, AmbientMetric, MapField, PointJet,
    TargetMetric,
};
use crate::error::{GeoError, Result};
use crate::numerics::fd::ORACLE_STEP;
use crate::numerics::quadrature::simpson_weights;
use crate::numerics::Jet;
use crate::rh_flow::conjugate_heat::unit_sphere_area;
use crate::rh_flow::ConjugateHeatState;

/// One boundary sphere of the radial domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBoundary {
    pub radius: f64,
    /// Outer sphere (normal toward the origin) or inner sphere of an annulus.
    pub outer: bool,
    /// `∂H/∂t` along the boundary motion.
    pub mean_curvature_rate: f64,
}

/// Boundary integrand terms; tangential gradients of radial fields vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTerms {
    pub radius: f64,
    pub mean_curvature: f64,
    pub mean_curvature_rate: f64,
    /// `−½∇₀R`.
    pub scalar_slope: f64,
    /// `−H R₀₀`.
    pub ricci_normal: f64,
    /// `α𝒜(∇̂φ, ∇̂φ)`.
    pub map_term: f64,
    pub integrand: f64,
    /// `u dA` integrated over the sphere.
    pub weight: f64,
}

/// Static radial ambient data.
#[derive(Debug, Clone)]
pub struct RadialData<'a> {
    pub metric: &'a AmbientMetric,
    pub map: &'a MapField,
    pub target: &'a TargetMetric,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm1Rhs {
    /// `|Ric + ∇²f − α∇φ⊗∇φ|²` at the bulk nodes.
    pub soliton_defect: Vec<f64>,
    /// `α|τφ − ⟨∇φ, ∇f⟩|²_γ` at the bulk nodes.
    pub map_defect: Vec<f64>,
    pub bulk: f64,
    pub boundary_terms: Vec<BoundaryTerms>,
    pub boundary: f64,
    pub total: f64,
}

fn axis(m: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0; m];
    x[0] = r;
    x
}

/// `2∫(|Ric + ∇²f − α∇φ⊗∇φ|² + α|τφ − ⟨∇φ,∇f⟩|²)u dM` and
/// `2∫(∂_tH − ½∇₀R − H R₀₀ + α𝒜(∇̂φ,∇̂φ))u dA` for `u = state.u`.
pub fn thm1_rhs(data: &RadialData, state: &ConjugateHeatState, boundaries: &[RadialBoundary]) -> Result<Thm1Rhs> {
    let metric = data.metric;
    let m = metric.dim();
    let md = m as f64;
    let (f, df, ddf) = radial_potential(state)?;
    let n = state.r.len();
    let h = state.r[1] - state.r[0];
    let omega = unit_sphere_area(m);
    let quad = simpson_weights(n, h);
    let mut soliton_defect = Vec::with_capacity(n);
    let mut map_defect = Vec::with_capacity(n);
    let mut bulk = 0.0;
    for i in 0..n {
        let r = state.r[i];
        let x = axis(m, r);
        let fj = metric.factor_jet(&x)?;
        let pj = PointJet::from_radial(Jet::new(f[i], df[i], ddf[i]), &x, true)?;
        let mut bracket = ricci(metric, &x)?.data + hessian_from_jets(&fj, &pj);
        let mut map_sq = 0.0;
        if !data.map.is_constant() {
            let mj = data.map.jet(&x)?;
            bracket -= pullback_from_jet(&mj, data.target)? * data.alpha;
            let tension = tension_from_jets(&fj, &mj, data.target)?;
            let g = data.target.factor_at(&mj.value)?;
            let f2 = fj.value * fj.value;
            map_sq = tension
                .iter()
                .enumerate()
                .map(|(a, t)| {
                    let drift: f64 = (0..m).map(|k| f2 * pj.grad[k] * mj.jac[(a, k)]).sum();
                    (t - drift).powi(2)
                })
                .sum::<f64>()
                / (g * g);
        }
        let sol = metric.tensor_norm_sq(&x, &bracket)?;
        let dm = omega * fj.value.powi(-(m as i32)) * r.powi(m as i32 - 1);
        bulk += 2.0 * quad[i] * (sol + data.alpha * map_sq) * state.u[i] * dm;
        soliton_defect.push(sol);
        map_defect.push(data.alpha * map_sq);
    }

    let mut boundary_terms = Vec::with_capacity(boundaries.len());
    let mut boundary = 0.0;
    for b in boundaries {
        let i = if b.outer { n - 1 } else { 0 };
        if (state.r[i] - b.radius).abs() > 1e-9 * b.radius.max(1.0) {
            return Err(GeoError::Precondition(format!("boundary r = {} is not a grid end ({})", b.radius, state.r[i])));
        }
        let x = axis(m, b.radius);
        let jet = metric.factor().eval_positive(b.radius)?;
        let sign = if b.outer { 1.0 } else { -1.0 };
        let principal = sign * (jet.value / b.radius - jet.d1);
        let mean = (md - 1.0) * principal;
        // e₀ = −sign·F∂_r
        let (mut out, mut inn) = (x.clone(), x.clone());
        out[0] += ORACLE_STEP;
        inn[0] -= ORACLE_STEP;
        let dr = (scalar_curvature(metric, &out)? - scalar_curvature(metric, &inn)?) / (2.0 * ORACLE_STEP);
        let scalar_slope = 0.5 * sign * jet.value * dr;
        let ricci_normal = -mean * jet.value * jet.value * ricci(metric, &x)?.data[(0, 0)];
        let map_term = if data.map.is_constant() || data.alpha == 0.0 {
            0.0
        } else {
            let mj = data.map.jet(&x)?;
            let pull = pullback_from_jet(&mj, data.target)?;
            let tangential: f64 = (1..m).map(|j| pull[(j, j)]).sum::<f64>() * jet.value * jet.value;
            data.alpha * principal * tangential
        };
        let integrand = b.mean_curvature_rate + scalar_slope + ricci_normal + map_term;
        let weight = omega * jet.value.powf(1.0 - md) * b.radius.powf(md - 1.0) * state.u[i];
        boundary += 2.0 * integrand * weight;
        boundary_terms.push(BoundaryTerms {
            radius: b.radius,
            mean_curvature: mean,
            mean_curvature_rate: b.mean_curvature_rate,
            scalar_slope,
            ricci_normal,
            map_term,
            integrand,
            weight,
        });
    }
    Ok(Thm1Rhs { soliton_defect, map_defect, bulk, boundary_terms, boundary, total: bulk + boundary })
}
