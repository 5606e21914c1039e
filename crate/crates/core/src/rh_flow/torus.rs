//! The modified flow on the flat 2-torus `[0, 2π)²` with spectral derivatives.
//!
//! The metric is carried as three component fields `(g₁₁, g₁₂, g₂₂)` because the
//! Hessian and map terms are not pure trace.

use crate::conformal_geometry::TargetMetric;
use crate::error::{GeoError, Result};
use crate::numerics::spectral::PeriodicGrid;

/// Symmetric 2×2 index pairs in storage order.
pub const PAIRS: [(usize, usize); 3] = [(0, 0), (0, 1), (1, 1)];

pub(crate) fn pair_index(i: usize, j: usize) -> usize {
    i + j
}

#[derive(Debug, Clone)]
pub struct TorusState {
    pub grid: PeriodicGrid,
    /// `[g₁₁, g₁₂, g₂₂]` sampled on the grid.
    pub metric: [Vec<f64>; 3],
    /// One field per target component.
    pub map: Vec<Vec<f64>>,
    pub potential: Vec<f64>,
    pub time: f64,
}

impl TorusState {
    /// State with conformal metric `e^{2w}δ`.
    pub fn conformal(grid: PeriodicGrid, w: &[f64], map: Vec<Vec<f64>>, potential: Vec<f64>) -> Result<Self> {
        let len = grid.len();
        if w.len() != len || potential.len() != len || map.iter().any(|c| c.len() != len) {
            return Err(GeoError::Dimension { expected: len, got: w.len() });
        }
        let e: Vec<f64> = w.iter().map(|v| (2.0 * v).exp()).collect();
        Ok(TorusState { grid, metric: [e.clone(), vec![0.0; len], e], map, potential, time: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn det(&self, p: usize) -> f64 {
        self.metric[0][p] * self.metric[2][p] - self.metric[1][p] * self.metric[1][p]
    }

    /// Smallest eigenvalue of the metric over the grid.
    pub fn min_eigenvalue(&self) -> f64 {
        (0..self.len())
            .map(|p| {
                let (a, b, c) = (self.metric[0][p], self.metric[1][p], self.metric[2][p]);
                0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `∫ e^{−f} dM`.
    pub fn weighted_volume(&self) -> f64 {
        let w: Vec<f64> = (0..self.len()).map(|p| self.det(p).sqrt() * (-self.potential[p]).exp()).collect();
        self.grid.integrate(&w)
    }

    fn check_finite(&self) -> Result<()> {
        let all = self.metric.iter().chain(self.map.iter()).chain(std::iter::once(&self.potential));
        for field in all {
            if field.iter().any(|v| !v.is_finite()) {
                return Err(GeoError::NonFinite { at: self.time });
            }
        }
        if self.min_eigenvalue() <= 0.0 {
            return Err(GeoError::Singular(format!("metric degenerate at t = {}", self.time)));
        }
        Ok(())
    }
}

/// Pointwise geometric quantities of a torus state.
#[derive(Debug, Clone)]
pub struct TorusGeometry {
    pub inverse: [Vec<f64>; 3],
    pub volume_density: Vec<f64>,
    pub ricci: [Vec<f64>; 3],
    pub scalar: Vec<f64>,
    /// Partials `∂_k f`.
    pub potential_grad: [Vec<f64>; 2],
    pub potential_hessian: [Vec<f64>; 3],
    pub potential_laplacian: Vec<f64>,
    pub potential_grad_norm_sq: Vec<f64>,
    /// `∂_k φ^α` indexed `[α][k]`.
    pub map_grad: Vec<[Vec<f64>; 2]>,
    /// Target metric coefficient `G(φ)⁻²` at each point.
    pub target_weight: Vec<f64>,
    pub pullback: [Vec<f64>; 3],
    pub map_energy_density: Vec<f64>,
    pub tension: Vec<Vec<f64>>,
    /// `⟨∇f, ∇φ⟩ = g^{ij}∂_i f ∂_j φ^α`.
    pub drift: Vec<Vec<f64>>,
}

fn contract(inv: &[Vec<f64>; 3], t: &[Vec<f64>; 3], p: usize) -> f64 {
    inv[0][p] * t[0][p] + 2.0 * inv[1][p] * t[1][p] + inv[2][p] * t[2][p]
}

pub fn torus_geometry(state: &TorusState, target: &TargetMetric) -> Result<TorusGeometry> {
    let grid = &state.grid;
    let len = state.len();
    let g = &state.metric;
    let n_map = state.map.len();
    if n_map != target.dim() {
        return Err(GeoError::Dimension { expected: target.dim(), got: n_map });
    }
    let det: Vec<f64> = (0..len).map(|p| state.det(p)).collect();
    let inverse = [
        (0..len).map(|p| g[2][p] / det[p]).collect::<Vec<_>>(),
        (0..len).map(|p| -g[1][p] / det[p]).collect(),
        (0..len).map(|p| g[0][p] / det[p]).collect(),
    ];
    let inv = |i: usize, j: usize, p: usize| inverse[pair_index(i, j)][p];
    // dg[l][pair] = ∂_l g_pair
    let dg: Vec<Vec<Vec<f64>>> = (0..2).map(|l| g.iter().map(|c| grid.derivative(c, l, 1)).collect()).collect();
    let dgc = |l: usize, i: usize, j: usize, p: usize| dg[l][pair_index(i, j)][p];
    // gam[k][pair] = Γ^k_ij
    let gam: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|k| {
            PAIRS
                .iter()
                .map(|&(i, j)| {
                    (0..len)
                        .map(|p| {
                            0.5 * (0..2)
                                .map(|l| inv(k, l, p) * (dgc(i, j, l, p) + dgc(j, i, l, p) - dgc(l, i, j, p)))
                                .sum::<f64>()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let gm = |k: usize, i: usize, j: usize, p: usize| gam[k][pair_index(i, j)][p];
    let half_log_det: Vec<f64> = det.iter().map(|d| 0.5 * d.ln()).collect();
    let dl = [grid.derivative(&half_log_det, 0, 1), grid.derivative(&half_log_det, 1, 1)];
    let ddl = [grid.derivative(&half_log_det, 0, 2), grid.dx(&dl[1]), grid.derivative(&half_log_det, 1, 2)];
    // Σ_k ∂_k Γ^k_ij
    let div_gam: Vec<Vec<f64>> = (0..3)
        .map(|pair| {
            let a = grid.derivative(&gam[0][pair], 0, 1);
            let b = grid.derivative(&gam[1][pair], 1, 1);
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        })
        .collect();
    let ricci: [Vec<f64>; 3] = std::array::from_fn(|pair| {
        let (i, j) = PAIRS[pair];
        (0..len)
            .map(|p| {
                let mut v = div_gam[pair][p] - ddl[pair][p];
                for q in 0..2 {
                    v += dl[q][p] * gm(q, i, j, p);
                    for k in 0..2 {
                        v -= gm(k, j, q, p) * gm(q, i, k, p);
                    }
                }
                v
            })
            .collect()
    });
    let scalar: Vec<f64> = (0..len).map(|p| contract(&inverse, &ricci, p)).collect();

    let f = &state.potential;
    let df = [grid.dx(f), grid.dy(f)];
    let ddf = [grid.derivative(f, 0, 2), grid.dx(&df[1]), grid.derivative(f, 1, 2)];
    let hess_of = |d: &[Vec<f64>; 2], dd: &[Vec<f64>; 3]| -> [Vec<f64>; 3] {
        std::array::from_fn(|pair| {
            let (i, j) = PAIRS[pair];
            (0..len).map(|p| dd[pair][p] - gm(0, i, j, p) * d[0][p] - gm(1, i, j, p) * d[1][p]).collect()
        })
    };
    let potential_hessian = hess_of(&df, &ddf);
    let potential_laplacian: Vec<f64> = (0..len).map(|p| contract(&inverse, &potential_hessian, p)).collect();
    let grad_sq = |a: &[Vec<f64>; 2], b: &[Vec<f64>; 2], p: usize| {
        inv(0, 0, p) * a[0][p] * b[0][p]
            + inv(0, 1, p) * (a[0][p] * b[1][p] + a[1][p] * b[0][p])
            + inv(1, 1, p) * a[1][p] * b[1][p]
    };
    let potential_grad_norm_sq: Vec<f64> = (0..len).map(|p| grad_sq(&df, &df, p)).collect();

    let map_grad: Vec<[Vec<f64>; 2]> = state.map.iter().map(|c| [grid.dx(c), grid.dy(c)]).collect();
    let map_second: Vec<[Vec<f64>; 3]> = state
        .map
        .iter()
        .zip(&map_grad)
        .map(|(c, d)| [grid.derivative(c, 0, 2), grid.dx(&d[1]), grid.derivative(c, 1, 2)])
        .collect();
    let mut target_weight = vec![1.0; len];
    let mut target_gamma: Vec<Vec<nalgebra::DMatrix<f64>>> = Vec::new();
    let flat_target = target.factor().is_constant();
    for p in 0..len {
        let y: Vec<f64> = state.map.iter().map(|c| c[p]).collect();
        let gf = target.factor_at(&y)?;
        target_weight[p] = 1.0 / (gf * gf);
        if !flat_target {
            target_gamma.push(target.christoffel(&y)?);
        }
    }
    let pullback: [Vec<f64>; 3] = std::array::from_fn(|pair| {
        let (i, j) = PAIRS[pair];
        (0..len).map(|p| target_weight[p] * map_grad.iter().map(|d| d[i][p] * d[j][p]).sum::<f64>()).collect()
    });
    let map_energy_density: Vec<f64> = (0..len).map(|p| contract(&inverse, &pullback, p)).collect();
    let tension: Vec<Vec<f64>> = (0..n_map)
        .map(|th| {
            let h = hess_of(&map_grad[th], &map_second[th]);
            (0..len)
                .map(|p| {
                    let mut v = contract(&inverse, &h, p);
                    if !flat_target {
                        for a in 0..n_map {
                            for b in 0..n_map {
                                v += target_gamma[p][th][(a, b)] * grad_sq(&map_grad[a], &map_grad[b], p);
                            }
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    let drift: Vec<Vec<f64>> =
        map_grad.iter().map(|d| (0..len).map(|p| grad_sq(&df, d, p)).collect()).collect();
    Ok(TorusGeometry {
        volume_density: det.iter().map(|d| d.sqrt()).collect(),
        inverse,
        ricci,
        scalar,
        potential_grad: df,
        potential_hessian,
        potential_laplacian,
        potential_grad_norm_sq,
        map_grad,
        target_weight,
        pullback,
        map_energy_density,
        tension,
        drift,
    })
}

/// Time derivatives of the modified flow: `h = ∂_t g`, `∂_t φ`, `ℓ = ∂_t f`.
#[derive(Debug, Clone)]
pub struct FlowRates {
    pub metric: [Vec<f64>; 3],
    pub map: Vec<Vec<f64>>,
    pub potential: Vec<f64>,
    /// `max |tr_g h / 2 − ℓ|` over the grid.
    pub measure_defect: f64,
}

pub fn flow_rates(state: &TorusState, alpha: f64, target: &TargetMetric) -> Result<FlowRates> {
    let geo = torus_geometry(state, target)?;
    let len = state.len();
    let metric: [Vec<f64>; 3] = std::array::from_fn(|pair| {
        (0..len)
            .map(|p| -2.0 * (geo.ricci[pair][p] + geo.potential_hessian[pair][p] - alpha * geo.pullback[pair][p]))
            .collect()
    });
    let map = geo
        .tension
        .iter()
        .zip(&geo.drift)
        .map(|(t, d)| t.iter().zip(d).map(|(a, b)| a - b).collect())
        .collect();
    let potential: Vec<f64> = (0..len)
        .map(|p| -geo.scalar[p] - geo.potential_laplacian[p] + alpha * geo.map_energy_density[p])
        .collect();
    let measure_defect =
        (0..len).map(|p| (0.5 * contract(&geo.inverse, &metric, p) - potential[p]).abs()).fold(0.0, f64::max);
    Ok(FlowRates { metric, map, potential, measure_defect })
}

/// Explicit stepper for the modified flow.
#[derive(Debug, Clone)]
pub struct TorusFlow {
    pub alpha: f64,
    pub target: TargetMetric,
    /// Safety constant in `Δt ≤ cfl · h² · λ_min(g)`.
    pub cfl: f64,
}

impl TorusFlow {
    pub fn new(alpha: f64, target: TargetMetric) -> Self {
        TorusFlow { alpha, target, cfl: 0.1 }
    }

    pub fn max_step(&self, state: &TorusState) -> f64 {
        let h = state.grid.spacing();
        self.cfl * h * h * state.min_eigenvalue()
    }

    fn advance(&self, state: &TorusState, rates: &FlowRates, dt: f64) -> TorusState {
        let mut next = state.clone();
        for (c, r) in next.metric.iter_mut().zip(&rates.metric) {
            c.iter_mut().zip(r).for_each(|(v, d)| *v += dt * d);
        }
        for (c, r) in next.map.iter_mut().zip(&rates.map) {
            c.iter_mut().zip(r).for_each(|(v, d)| *v += dt * d);
        }
        // ℓ = tr_g h/2 integrated exactly, so e^{−f}dM is unchanged pointwise.
        for p in 0..next.len() {
            next.potential[p] = state.potential[p] + 0.5 * (next.det(p) / state.det(p)).ln();
        }
        next.time = state.time + dt;
        next
    }

    /// One Heun (explicit trapezoidal) step.
    pub fn step(&self, state: &TorusState, dt: f64) -> Result<TorusState> {
        let limit = self.max_step(state);
        if !(dt > 0.0 && dt <= limit) {
            return Err(GeoError::Cfl { dt, limit });
        }
        let k1 = flow_rates(state, self.alpha, &self.target)?;
        let predictor = self.advance(state, &k1, dt);
        predictor.check_finite()?;
        let k2 = flow_rates(&predictor, self.alpha, &self.target)?;
        let avg = FlowRates {
            metric: std::array::from_fn(|i| k1.metric[i].iter().zip(&k2.metric[i]).map(|(a, b)| 0.5 * (a + b)).collect()),
            map: k1.map.iter().zip(&k2.map).map(|(a, b)| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()).collect(),
            potential: k1.potential.iter().zip(&k2.potential).map(|(a, b)| 0.5 * (a + b)).collect(),
            measure_defect: k1.measure_defect.max(k2.measure_defect),
        };
        let next = self.advance(state, &avg, dt);
        next.check_finite()?;
        Ok(next)
    }
}

/// One step of the modified flow with a Euclidean target.
pub fn modified_flow_step_2d(state: &TorusState, alpha: f64, dt: f64) -> Result<TorusState> {
    TorusFlow::new(alpha, TargetMetric::euclidean(state.map.len())).step(state, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize, f: impl Fn(f64, f64) -> f64) -> TorusState {
        let grid = PeriodicGrid::new(n);
        let pot = grid.sample(f);
        let w = vec![0.0; grid.len()];
        TorusState::conformal(grid.clone(), &w, vec![vec![0.5; grid.len()]], pot).unwrap()
    }

    #[test]
    fn flat_trivial_state_is_fixed() {
        let s = flat(16, |_, _| 0.0);
        let next = modified_flow_step_2d(&s, 1.0, 1e-4).unwrap();
        for c in 0..3 {
            assert_eq!(next.metric[c], s.metric[c]);
        }
        assert_eq!(next.potential, s.potential);
    }

    #[test]
    fn potential_rate_is_backward_heat_on_flat_torus() {
        let s = flat(32, |x, _| x.sin());
        let r = flow_rates(&s, 0.0, &TargetMetric::euclidean(1)).unwrap();
        for p in 0..s.len() {
            let [x, _] = s.grid.point(p);
            assert!((r.potential[p] - x.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn conformal_round_bump_has_gauss_curvature() {
        // g = e^{2w}δ has R = −2e^{−2w}Δw.
        let grid = PeriodicGrid::new(32);
        let w = grid.sample(|x, y| 0.2 * x.cos() * (2.0 * y).sin());
        let s = TorusState::conformal(grid.clone(), &w, vec![vec![0.0; grid.len()]], vec![0.0; grid.len()]).unwrap();
        let geo = torus_geometry(&s, &TargetMetric::euclidean(1)).unwrap();
        for p in (0..grid.len()).step_by(37) {
            let [x, y] = grid.point(p);
            let lap = -5.0 * 0.2 * x.cos() * (2.0 * y).sin();
            let expect = -2.0 * (-2.0 * w[p]).exp() * lap;
            assert!((geo.scalar[p] - expect).abs() < 1e-10, "{} vs {}", geo.scalar[p], expect);
        }
    }

    #[test]
    fn cfl_is_enforced() {
        let s = flat(16, |_, _| 0.0);
        assert!(matches!(modified_flow_step_2d(&s, 0.0, 1.0), Err(GeoError::Cfl { .. })));
    }
}
