//! The weighted functional `F^α_∞ = ∫(R_∞ − α|∇φ|²)e^{−f}dM + 2∫H_∞ e^{−f}dA`
//! on the periodic torus and on radial disks and annuli, and its first variation.

use crate::conformal_geometry::TargetMetric;
use crate::error::{GeoError, Result};
use crate::mcf::label_derivatives;
use crate::numerics::quadrature::simpson_weights;
use crate::numerics::spectral::PeriodicGrid;
use crate::rh_flow::conjugate_heat::unit_sphere_area;
use crate::rh_flow::torus::pair_index;
use crate::rh_flow::{torus_geometry, ConjugateHeatState, RadialMedium, TorusGeometry, TorusState};
use crate::verify::{FdReport, Gate, Resolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Sampled integrands with their quadrature weights (which include `e^{−f}` and the measure).
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalBreakdown {
    /// `R_∞ − α|∇φ|²` at the bulk nodes.
    pub bulk_samples: Vec<f64>,
    pub bulk_weights: Vec<f64>,
    /// `H_∞ = H + e₀f` on each boundary component.
    pub boundary_samples: Vec<f64>,
    pub boundary_weights: Vec<f64>,
    pub bulk: f64,
    pub boundary: f64,
    pub total: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl FunctionalBreakdown {
    fn assemble(bulk_samples: Vec<f64>, bulk_weights: Vec<f64>, boundary_samples: Vec<f64>, boundary_weights: Vec<f64>) -> Self {
        let bulk = dot(&bulk_samples, &bulk_weights);
        let boundary = dot(&boundary_samples, &boundary_weights);
        FunctionalBreakdown { bulk_samples, bulk_weights, boundary_samples, boundary_weights, bulk, boundary, total: bulk + 2.0 * boundary }
    }

    /// Total recomputed from the stored samples and weights.
    pub fn recomputed_total(&self) -> f64 {
        dot(&self.bulk_samples, &self.bulk_weights) + 2.0 * dot(&self.boundary_samples, &self.boundary_weights)
    }
}

impl fmt::Display for FunctionalBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bulk={:.17e}", self.bulk)?;
        writeln!(f, "boundary={:.17e}", self.boundary)?;
        write!(f, "total={:.17e}", self.total)
    }
}

fn torus_bulk(state: &TorusState, geo: &TorusGeometry, alpha: f64, parts: bool) -> (Vec<f64>, Vec<f64>) {
    let h2 = state.grid.spacing().powi(2);
    let samples = (0..state.len())
        .map(|p| {
            let weighted = if parts {
                geo.potential_grad_norm_sq[p]
            } else {
                2.0 * geo.potential_laplacian[p] - geo.potential_grad_norm_sq[p]
            };
            geo.scalar[p] + weighted - alpha * geo.map_energy_density[p]
        })
        .collect();
    let weights = (0..state.len()).map(|p| h2 * geo.volume_density[p] * (-state.potential[p]).exp()).collect();
    (samples, weights)
}

/// `F^α_∞` on the torus; there is no boundary term.
pub fn f_alpha_torus(state: &TorusState, alpha: f64, target: &TargetMetric) -> Result<FunctionalBreakdown> {
    let geo = torus_geometry(state, target)?;
    let (s, w) = torus_bulk(state, &geo, alpha, false);
    Ok(FunctionalBreakdown::assemble(s, w, Vec::new(), Vec::new()))
}

/// The same functional after integrating `∫Δf e^{−f}` by parts:
/// `∫(R + |∇f|² − α|∇φ|²)e^{−f}dM`.
pub fn f_alpha_torus_by_parts(state: &TorusState, alpha: f64, target: &TargetMetric) -> Result<f64> {
    let geo = torus_geometry(state, target)?;
    let (s, w) = torus_bulk(state, &geo, alpha, true);
    Ok(dot(&s, &w))
}

/// Potential `f = −log u` and its first two radial derivatives on the state's grid.
pub(crate) fn radial_potential(state: &ConjugateHeatState) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = state.r.len();
    if n < 5 {
        return Err(GeoError::Insufficient(format!("{n} radial nodes")));
    }
    if let Some(i) = state.u.iter().position(|u| !(*u > 0.0 && u.is_finite())) {
        return Err(GeoError::Domain(format!("weight u = {} at r = {}", state.u[i], state.r[i])));
    }
    let f: Vec<f64> = state.u.iter().map(|u| -u.ln()).collect();
    let h = state.r[1] - state.r[0];
    let (d1, d2) = label_derivatives(&f, false);
    Ok((f, d1.iter().map(|v| v / h).collect(), d2.iter().map(|v| v / (h * h)).collect()))
}

/// `F^α_∞` for radial data on `[a, b]` with `u = e^{−f}` the given weight.
///
/// A grid starting at `r = 0` is a disk; otherwise the inner circle is a second boundary.
pub fn f_alpha_radial(medium: &RadialMedium, state: &ConjugateHeatState) -> Result<FunctionalBreakdown> {
    let m = medium.dim;
    let md = m as f64;
    let (_, df, ddf) = radial_potential(state)?;
    let n = state.r.len();
    let h = state.r[1] - state.r[0];
    let omega = unit_sphere_area(m);
    let quad = simpson_weights(n, h);
    let mut samples = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let r = state.r[i];
        let c = medium.at(state.time, r)?;
        let (fv, fs) = (c.factor.value, c.factor.d1);
        let radial_lap = if r == 0.0 { md * ddf[i] } else { ddf[i] + (md - 1.0) * df[i] / r };
        let lap = fv * fv * radial_lap + (2.0 - md) * fv * fs * df[i];
        let grad_sq = fv * fv * df[i] * df[i];
        samples.push(c.potential + 2.0 * lap - grad_sq);
        weights.push(quad[i] * omega * fv.powi(-(m as i32)) * r.powi(m as i32 - 1) * state.u[i]);
    }
    let mut bsamples = Vec::new();
    let mut bweights = Vec::new();
    let mut edge = |i: usize, outer: bool| -> Result<()> {
        let r = state.r[i];
        let c = medium.at(state.time, r)?;
        let (fv, fs) = (c.factor.value, c.factor.d1);
        let sign = if outer { 1.0 } else { -1.0 };
        let mean = sign * (md - 1.0) * (fv / r - fs);
        let normal_slope = -sign * fv * df[i];
        bsamples.push(mean + normal_slope);
        bweights.push(omega * fv.powf(1.0 - md) * r.powf(md - 1.0) * state.u[i]);
        Ok(())
    };
    if state.r[0] > 0.0 {
        edge(0, false)?;
    }
    edge(n - 1, true)?;
    Ok(FunctionalBreakdown::assemble(samples, weights, bsamples, bweights))
}

/// Variation direction `(h, ϑ)` on the torus; `ℓ = tr_g h / 2` is derived from the base metric.
#[derive(Debug, Clone)]
pub struct TorusPerturbation {
    pub metric: [Vec<f64>; 3],
    pub map: Vec<Vec<f64>>,
}

impl TorusPerturbation {
    pub fn zero(grid: &PeriodicGrid, n_map: usize) -> Self {
        let z = vec![0.0; grid.len()];
        TorusPerturbation { metric: [z.clone(), z.clone(), z.clone()], map: vec![z; n_map] }
    }

    /// Random low-mode trigonometric fields from a seeded ChaCha stream.
    pub fn random(grid: &PeriodicGrid, n_map: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = |rng: &mut ChaCha8Rng| {
            let terms: Vec<(f64, f64, f64, f64)> = (0..3)
                .map(|_| {
                    (
                        rng.random_range(-0.5..0.5),
                        rng.random_range(0..=2) as f64,
                        rng.random_range(0..=2) as f64,
                        rng.random_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            grid.sample(|x, y| terms.iter().map(|(a, kx, ky, ph)| a * (kx * x + ky * y + ph).cos()).sum())
        };
        let metric = std::array::from_fn(|_| field(&mut rng));
        let map = (0..n_map).map(|_| field(&mut rng)).collect();
        TorusPerturbation { metric, map }
    }

    /// `ℓ = g^{ij}h_{ij} / 2` at the base state.
    pub fn potential_rate(&self, state: &TorusState) -> Vec<f64> {
        (0..state.len())
            .map(|p| {
                let det = state.det(p);
                let (g11, g12, g22) = (state.metric[0][p], state.metric[1][p], state.metric[2][p]);
                0.5 * (g22 * self.metric[0][p] - 2.0 * g12 * self.metric[1][p] + g11 * self.metric[2][p]) / det
            })
            .collect()
    }

    /// The state `(g + εh, f + εℓ, φ + εϑ)`.
    pub fn displace(&self, state: &TorusState, eps: f64) -> Result<TorusState> {
        if self.map.len() != state.map.len() {
            return Err(GeoError::Dimension { expected: state.map.len(), got: self.map.len() });
        }
        let ell = self.potential_rate(state);
        let shift = |base: &[f64], dir: &[f64]| -> Vec<f64> { base.iter().zip(dir).map(|(b, d)| b + eps * d).collect() };
        let out = TorusState {
            grid: state.grid.clone(),
            metric: std::array::from_fn(|k| shift(&state.metric[k], &self.metric[k])),
            map: state.map.iter().zip(&self.map).map(|(b, d)| shift(b, d)).collect(),
            potential: shift(&state.potential, &ell),
            time: state.time,
        };
        if out.min_eigenvalue() <= 0.0 {
            return Err(GeoError::Domain(format!("g + εh is not positive definite at ε = {eps}")));
        }
        Ok(out)
    }
}

/// Both sides of the first-variation formula.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationResult {
    pub lhs: f64,
    pub rhs: f64,
    pub eps: f64,
    /// `|D(ε) − D(2ε)|` for the central difference `D`.
    pub richardson_gap: f64,
    pub n: usize,
}

impl VariationResult {
    pub fn report(&self, name: &str, tol: f64, gate: Gate) -> FdReport {
        FdReport::scalar(name, self.lhs, self.rhs, tol, gate, Resolution::default().eps(self.eps).n(self.n))
    }
}

/// `∫(−⟨h, Ric + ∇²f − α∇φ⊗∇φ⟩ + 2α⟨τφ − ⟨∇f, ∇φ⟩, ϑ⟩_γ)e^{−f}dM` at the base state.
pub fn variation_rhs(state: &TorusState, alpha: f64, target: &TargetMetric, pert: &TorusPerturbation) -> Result<f64> {
    let geo = torus_geometry(state, target)?;
    let inv = |i: usize, j: usize, p: usize| geo.inverse[pair_index(i, j)][p];
    let h = |i: usize, j: usize, p: usize| pert.metric[pair_index(i, j)][p];
    let integrand: Vec<f64> = (0..state.len())
        .map(|p| {
            let bracket: [f64; 3] = std::array::from_fn(|k| {
                geo.ricci[k][p] + geo.potential_hessian[k][p] - alpha * geo.pullback[k][p]
            });
            let t = |i: usize, j: usize| bracket[pair_index(i, j)];
            let mut pairing = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let raised: f64 = (0..2).map(|a| (0..2).map(|b| inv(i, a, p) * h(a, b, p) * inv(b, j, p)).sum::<f64>()).sum();
                    pairing += raised * t(i, j);
                }
            }
            let map_term: f64 = (0..state.map.len())
                .map(|a| (geo.tension[a][p] - geo.drift[a][p]) * pert.map[a][p])
                .sum::<f64>()
                * geo.target_weight[p];
            (-pairing + 2.0 * alpha * map_term) * geo.volume_density[p] * (-state.potential[p]).exp()
        })
        .collect();
    Ok(state.grid.integrate(&integrand))
}

/// Central difference of `F^α_∞` along the perturbation against the quadrature formula.
///
/// Fails when the differences at `ε` and `2ε` disagree by more than a tenth while the
/// cancellation error `ε_mach ∫|integrand| / ε` is comparable to that disagreement.
pub fn variation_delta_f(
    state: &TorusState,
    alpha: f64,
    target: &TargetMetric,
    pert: &TorusPerturbation,
    eps: f64,
) -> Result<VariationResult> {
    if !(eps > 0.0) {
        return Err(GeoError::Domain(format!("variation step ε = {eps}")));
    }
    let value = |e: f64| -> Result<f64> { Ok(f_alpha_torus(&pert.displace(state, e)?, alpha, target)?.total) };
    let central = |e: f64| -> Result<f64> { Ok((value(e)? - value(-e)?) / (2.0 * e)) };
    let lhs = central(eps)?;
    let coarse = central(2.0 * eps)?;
    let gap = (lhs - coarse).abs();
    let base = f_alpha_torus(state, alpha, target)?;
    let magnitude: f64 = base.bulk_samples.iter().zip(&base.bulk_weights).map(|(s, w)| (s * w).abs()).sum::<f64>() + 1.0;
    let noise = f64::EPSILON * magnitude / eps;
    // A disagreement is only blamed on ε when cancellation could explain it.
    if gap > 0.1 * lhs.abs() + 1e-10 * (1.0 + base.total.abs()) && noise > 0.01 * gap {
        return Err(GeoError::Precondition(format!(
            "ε = {eps:e} too small: central differences at ε and 2ε are {lhs:e} and {coarse:e}"
        )));
    }
    let rhs = variation_rhs(state, alpha, target, pert)?;
    Ok(VariationResult { lhs, rhs, eps, richardson_gap: gap, n: state.grid.n() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal_geometry::{AmbientMetric, MapField, RadialProfile};
    use std::f64::consts::PI;

    fn flat(n: usize, f: impl Fn(f64, f64) -> f64, map: Vec<Vec<f64>>) -> TorusState {
        let grid = PeriodicGrid::new(n);
        let w = vec![0.0; grid.len()];
        let pot = grid.sample(f);
        TorusState::conformal(grid, &w, map, pot).unwrap()
    }

    #[test]
    fn flat_torus_constant_potential_vanishes() {
        let s = flat(16, |_, _| 0.0, vec![vec![0.0; 256]]);
        let b = f_alpha_torus(&s, 1.0, &TargetMetric::euclidean(1)).unwrap();
        assert!(b.total.abs() < 1e-12);
        assert_eq!(b.boundary, 0.0);
    }

    #[test]
    fn two_quadrature_routes_agree() {
        let n = 32;
        let s = flat(n, |x, _| x.sin(), vec![vec![0.0; n * n]]);
        let direct = f_alpha_torus(&s, 0.5, &TargetMetric::euclidean(1)).unwrap();
        let parts = f_alpha_torus_by_parts(&s, 0.5, &TargetMetric::euclidean(1)).unwrap();
        assert!((direct.total - parts).abs() < 1e-11, "{} {parts}", direct.total);
        // ∫ cos²x e^{−sin x} dx dy = 2π · 2π I₁(1)
        let oracle = 4.0 * PI * PI * 0.565_159_103_992_485;
        assert!((parts - oracle).abs() < 1e-10, "{parts} {oracle}");
        assert_eq!(direct.total, direct.bulk + 2.0 * direct.boundary);
        assert!((direct.recomputed_total() - direct.total).abs() < 1e-14 * direct.total.abs());
    }

    #[test]
    fn unit_disk_boundary_term() {
        let m = 2;
        let medium = RadialMedium::from_metric(AmbientMetric::euclidean(m), MapField::Constant(vec![0.0]), TargetMetric::euclidean(1), 0.0);
        let r: Vec<f64> = (0..65).map(|i| i as f64 / 64.0).collect();
        let state = ConjugateHeatState { time: 0.0, u: vec![1.0; r.len()], r };
        let b = f_alpha_radial(&medium, &state).unwrap();
        assert!(b.bulk.abs() < 1e-14);
        assert!((b.total - 4.0 * PI).abs() < 1e-13, "{b}");
        let text = b.to_string();
        assert!(text.contains("bulk=") && text.contains("boundary=") && text.contains("total="));
    }

    #[test]
    fn radial_bulk_matches_independent_integral() {
        // Cigar, f = r²/2 on [0.5, 1.5], against closed-form integrands and Gauss quadrature.
        let m = 2;
        let metric = AmbientMetric::new(m, RadialProfile::Cigar).unwrap();
        let medium = RadialMedium::from_metric(metric, MapField::Constant(vec![0.0]), TargetMetric::euclidean(1), 0.0);
        let n = 401;
        let r: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 / (n - 1) as f64).collect();
        let u: Vec<f64> = r.iter().map(|r| (-0.5 * r * r).exp()).collect();
        let state = ConjugateHeatState { time: 0.0, r, u };
        let b = f_alpha_radial(&medium, &state).unwrap();
        let integrand = |r: f64| {
            let f2 = 1.0 + r * r;
            let scalar = 4.0 / f2;
            // f'' + f'/r = 2; the (2 − m) drift term vanishes in two dimensions.
            let lap = f2 * 2.0;
            let grad = f2 * r * r;
            (scalar + 2.0 * lap - grad) * (-0.5 * r * r).exp() * 2.0 * PI * r / f2
        };
        let k = 2000;
        let h = 1.0 / k as f64;
        let oracle: f64 = (0..k)
            .map(|i| {
                let a = 0.5 + i as f64 * h;
                let (x1, x2) = (a + h * (0.5 - 0.5 / 3f64.sqrt()), a + h * (0.5 + 0.5 / 3f64.sqrt()));
                0.5 * h * (integrand(x1) + integrand(x2))
            })
            .sum();
        assert!((b.bulk - oracle).abs() < 1e-8 * oracle.abs(), "{} {oracle}", b.bulk);
        assert_eq!(b.boundary_samples.len(), 2);
    }

    #[test]
    fn zero_direction_gives_zero_variation() {
        let n = 16;
        let s = flat(n, |x, _| 0.3 * x.sin(), vec![vec![0.0; n * n]]);
        let pert = TorusPerturbation::zero(&s.grid, 1);
        let v = variation_delta_f(&s, 1.0, &TargetMetric::euclidean(1), &pert, 1e-4).unwrap();
        assert_eq!((v.lhs, v.rhs), (0.0, 0.0));
    }

    #[test]
    fn steady_flat_data_is_critical() {
        let n = 16;
        let s = flat(n, |_, _| 0.0, vec![vec![0.0; n * n]]);
        let pert = TorusPerturbation::random(&s.grid, 1, 7);
        let target = TargetMetric::euclidean(1);
        let coarse = variation_delta_f(&s, 1.0, &target, &pert, 1e-3).unwrap();
        let fine = variation_delta_f(&s, 1.0, &target, &pert, 5e-4).unwrap();
        assert!(coarse.rhs.abs() < 1e-14, "{coarse:?}");
        // Only the O(ε²) truncation of the difference quotient remains.
        assert!(fine.lhs.abs() < 1e-6 && (coarse.lhs / fine.lhs - 4.0).abs() < 0.1, "{coarse:?} {fine:?}");
    }

    #[test]
    fn diagonal_metric_directions() {
        let n = 32;
        let s = flat(n, |x, _| 0.3 * x.sin(), vec![vec![0.0; n * n]]);
        let target = TargetMetric::euclidean(1);
        // h = diag(sin x₂, 0) is orthogonal to the x₁-dependent bracket: both sides vanish.
        let mut pert = TorusPerturbation::zero(&s.grid, 1);
        pert.metric[0] = s.grid.sample(|_, y| y.sin());
        let v = variation_delta_f(&s, 0.0, &target, &pert, 1e-4).unwrap();
        assert!(v.report("diag_y", 1e-9, Gate::Absolute).pass, "{v:?}");
        pert.metric[0] = s.grid.sample(|x, _| x.sin());
        let v = variation_delta_f(&s, 0.0, &target, &pert, 1e-4).unwrap();
        assert!(v.rhs.abs() > 0.1);
        assert!(v.report("diag_x", 1e-4, Gate::Relative).pass, "{v:?}");
    }

    #[test]
    fn random_directions_on_curved_data() {
        let n = 32;
        let grid = PeriodicGrid::new(n);
        let w = grid.sample(|x, y| 0.2 * (x + y).sin());
        let map = vec![grid.sample(|x, y| x.cos() + 0.5 * y.sin())];
        let pot = grid.sample(|x, y| 0.3 * x.sin() - 0.1 * (2.0 * y).cos());
        let s = TorusState::conformal(grid, &w, map, pot).unwrap();
        for alpha in [0.0, 1.0] {
            for seed in 0..3 {
                let pert = TorusPerturbation::random(&s.grid, 1, seed);
                let v = variation_delta_f(&s, alpha, &TargetMetric::euclidean(1), &pert, 1e-4).unwrap();
                assert!(v.report("random", 1e-4, Gate::Relative).pass, "α={alpha} seed={seed} {v:?}");
            }
        }
    }

    #[test]
    fn tiny_step_is_refused() {
        let n = 16;
        let s = flat(n, |x, y| 0.3 * x.sin() + 0.2 * y.cos(), vec![vec![0.0; n * n]]);
        let pert = TorusPerturbation::random(&s.grid, 1, 3);
        let r = variation_delta_f(&s, 0.0, &TargetMetric::euclidean(1), &pert, 1e-15);
        assert!(matches!(r, Err(GeoError::Precondition(_))), "{r:?}");
    }
}
