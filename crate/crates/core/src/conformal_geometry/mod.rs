//! Pointwise tensor calculus for conformally flat metrics `g = F⁻²δ` on ℝ^m
//! and target metrics `γ = G⁻²δ` on ℝⁿ.

mod fields;
mod profile;

pub use fields::{norm, MapField, MapJet, PointJet, ScalarField};
pub use profile::{RadialProfile, TAYLOR_RADIUS};

use crate::error::{GeoError, Result};
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct AmbientMetric {
    dim: usize,
    factor: RadialProfile,
}

impl AmbientMetric {
    pub fn new(dim: usize, factor: RadialProfile) -> Result<Self> {
        if dim < 2 {
            return Err(GeoError::Precondition(format!("ambient dimension must be at least 2, got {dim}")));
        }
        Ok(AmbientMetric { dim, factor })
    }

    pub fn euclidean(dim: usize) -> Self {
        AmbientMetric { dim: dim.max(2), factor: RadialProfile::Constant(1.0) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factor(&self) -> &RadialProfile {
        &self.factor
    }

    pub fn is_flat_chart(&self) -> bool {
        self.factor.is_constant()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(GeoError::Dimension { expected: self.dim, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GeoError::Domain(format!("non-finite point {x:?}")));
        }
        Ok(())
    }

    /// Cartesian jet of the conformal factor `F(‖x‖)`.
    pub fn factor_jet(&self, x: &[f64]) -> Result<PointJet> {
        self.check_point(x)?;
        let r = norm(x);
        let radial = self.factor.eval_positive(r)?;
        PointJet::from_radial(radial, x, self.factor.smooth_at_origin())
    }

    pub fn factor_at(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.factor.eval_positive(norm(x))?.value)
    }

    /// Metric components `g_ij = F⁻² δ_ij`.
    pub fn tensor(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let f = self.factor_at(x)?;
        Ok(DMatrix::identity(self.dim, self.dim) / (f * f))
    }

    /// Squared g-norm of a covariant 2-tensor: `g^{ik} g^{jl} A_ij A_kl`.
    pub fn tensor_norm_sq(&self, x: &[f64], a: &DMatrix<f64>) -> Result<f64> {
        let f = self.factor_at(x)?;
        Ok(f.powi(4) * a.iter().map(|v| v * v).sum::<f64>())
    }

    pub fn tensor_inner(&self, x: &[f64], a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
        let f = self.factor_at(x)?;
        Ok(f.powi(4) * a.component_mul(b).sum())
    }

    /// g-trace `g^{ij} A_ij` of a covariant 2-tensor.
    pub fn trace(&self, x: &[f64], a: &DMatrix<f64>) -> Result<f64> {
        let f = self.factor_at(x)?;
        Ok(f * f * a.trace())
    }
}

#[derive(Debug, Clone)]
pub struct TargetMetric {
    dim: usize,
    factor: RadialProfile,
}

impl TargetMetric {
    pub fn new(dim: usize, factor: RadialProfile) -> Result<Self> {
        if dim < 1 {
            return Err(GeoError::Precondition("target dimension must be at least 1".into()));
        }
        Ok(TargetMetric { dim, factor })
    }

    pub fn euclidean(dim: usize) -> Self {
        TargetMetric { dim: dim.max(1), factor: RadialProfile::Constant(1.0) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factor(&self) -> &RadialProfile {
        &self.factor
    }

    pub fn factor_at(&self, y: &[f64]) -> Result<f64> {
        let rho = norm(y);
        self.factor.eval_positive(rho).map(|j| j.value).map_err(|_| {
            GeoError::Domain(format!("target factor not positive at ρ = {rho}"))
        })
    }

    /// `γ(u, v)` at the target point `y`.
    pub fn inner(&self, y: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let g = self.factor_at(y)?;
        Ok(u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (g * g))
    }

    /// Target Christoffel symbols `Γ^θ_{αβ}` at `y`, indexed `[θ][(α, β)]`.
    pub fn christoffel(&self, y: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        if y.len() != self.dim {
            return Err(GeoError::Dimension { expected: self.dim, got: y.len() });
        }
        let n = self.dim;
        if self.factor.is_constant() {
            self.factor_at(y)?;
            return Ok(vec![DMatrix::zeros(n, n); n]);
        }
        let jet = PointJet::from_radial(
            self.factor.eval_positive(norm(y)).map_err(|_| GeoError::Domain("target factor not positive".into()))?,
            y,
            self.factor.smooth_at_origin(),
        )?;
        let dlog: Vec<f64> = jet.grad.iter().map(|d| d / jet.value).collect();
        Ok((0..n)
            .map(|th| {
                DMatrix::from_fn(n, n, |a, b| {
                    let mut v = 0.0;
                    if b == th {
                        v -= dlog[a];
                    }
                    if a == th {
                        v -= dlog[b];
                    }
                    if a == b {
                        v += dlog[th];
                    }
                    v
                })
            })
            .collect())
    }
}

/// Which geometric object a [`SymTensor`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorKind {
    Metric,
    Ricci,
    Hessian,
    MapPullback,
    SolitonResidual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    pub kind: TensorKind,
    pub data: DMatrix<f64>,
}

impl SymTensor {
    pub fn new(kind: TensorKind, data: DMatrix<f64>) -> Self {
        SymTensor { kind, data }
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.data - self.data.transpose()).abs().max()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.abs().max()
    }
}

/// Christoffel symbols `Γ^k_{ij}` at `x`, indexed `[k][(i, j)]`.
pub fn christoffel(metric: &AmbientMetric, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let fj = metric.factor_jet(x)?;
    let m = metric.dim();
    // With w = −log F the metric is e^{2w}δ.
    let dw: Vec<f64> = fj.grad.iter().map(|d| -d / fj.value).collect();
    Ok((0..m)
        .map(|k| {
            DMatrix::from_fn(m, m, |i, j| {
                let mut v = 0.0;
                if k == i {
                    v += dw[j];
                }
                if k == j {
                    v += dw[i];
                }
                if i == j {
                    v -= dw[k];
                }
                v
            })
        })
        .collect())
}

pub fn ricci(metric: &AmbientMetric, x: &[f64]) -> Result<SymTensor> {
    let fj = metric.factor_jet(x)?;
    let m = metric.dim() as f64;
    let f = fj.value;
    let lap = fj.hess.trace();
    let grad_sq: f64 = fj.grad.iter().map(|v| v * v).sum();
    let diag = (f * lap - (m - 1.0) * grad_sq) / (f * f);
    let mut data = fj.hess * ((m - 2.0) / f);
    for i in 0..metric.dim() {
        data[(i, i)] += diag;
    }
    Ok(SymTensor::new(TensorKind::Ricci, data))
}

pub fn scalar_curvature(metric: &AmbientMetric, x: &[f64]) -> Result<f64> {
    let ric = ricci(metric, x)?;
    metric.trace(x, &ric.data)
}

/// Gauss curvature of a surface metric: `K = F² Δ log F` (Euclidean Laplacian).
pub fn gauss_curvature_2d(metric: &AmbientMetric, x: &[f64]) -> Result<f64> {
    if metric.dim() != 2 {
        return Err(GeoError::Dimension { expected: 2, got: metric.dim() });
    }
    let fj = metric.factor_jet(x)?;
    let f = fj.value;
    let grad_sq: f64 = fj.grad.iter().map(|v| v * v).sum();
    let lap_log = fj.hess.trace() / f - grad_sq / (f * f);
    Ok(f * f * lap_log)
}

pub fn hessian(metric: &AmbientMetric, h: &ScalarField, x: &[f64]) -> Result<SymTensor> {
    let fj = metric.factor_jet(x)?;
    let hj = h.jet(x)?;
    Ok(SymTensor::new(TensorKind::Hessian, hessian_from_jets(&fj, &hj)))
}

pub(crate) fn hessian_from_jets(fj: &PointJet, hj: &PointJet) -> DMatrix<f64> {
    let m = hj.grad.len();
    let f = fj.value;
    let cross: f64 = fj.grad.iter().zip(&hj.grad).map(|(a, b)| a * b).sum::<f64>() / f;
    DMatrix::from_fn(m, m, |i, j| {
        let mut v = hj.hess[(i, j)] + (fj.grad[j] * hj.grad[i] + fj.grad[i] * hj.grad[j]) / f;
        if i == j {
            v -= cross;
        }
        v
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradLaplacian {
    /// Contravariant components `(∇h)^i = F² ∂_i h`.
    pub grad: Vec<f64>,
    pub laplacian: f64,
    pub grad_norm_sq: f64,
}

pub fn grad_laplacian(metric: &AmbientMetric, h: &ScalarField, x: &[f64]) -> Result<GradLaplacian> {
    let fj = metric.factor_jet(x)?;
    let hj = h.jet(x)?;
    Ok(grad_laplacian_from_jets(&fj, &hj))
}

pub(crate) fn grad_laplacian_from_jets(fj: &PointJet, hj: &PointJet) -> GradLaplacian {
    let m = hj.grad.len() as f64;
    let f = fj.value;
    let f2 = f * f;
    let cross: f64 = fj.grad.iter().zip(&hj.grad).map(|(a, b)| a * b).sum();
    GradLaplacian {
        grad: hj.grad.iter().map(|d| f2 * d).collect(),
        laplacian: f2 * (hj.hess.trace() + (2.0 - m) * cross / f),
        grad_norm_sq: f2 * hj.grad.iter().map(|d| d * d).sum::<f64>(),
    }
}

pub fn tension_field(phi: &MapField, g: &AmbientMetric, gamma: &TargetMetric, x: &[f64]) -> Result<Vec<f64>> {
    let fj = g.factor_jet(x)?;
    let pj = phi.jet(x)?;
    tension_from_jets(&fj, &pj, gamma)
}

pub(crate) fn tension_from_jets(fj: &PointJet, pj: &MapJet, gamma: &TargetMetric) -> Result<Vec<f64>> {
    let n = pj.value.len();
    if n != gamma.dim() {
        return Err(GeoError::Dimension { expected: gamma.dim(), got: n });
    }
    let m = fj.grad.len();
    let f = fj.value;
    let gam = gamma.christoffel(&pj.value)?;
    // Euclidean contraction Σ_k φ^α_k φ^β_k.
    let contr = &pj.jac * pj.jac.transpose();
    Ok((0..n)
        .map(|th| {
            let lap = pj.hess[th].trace();
            let drift: f64 = (0..m).map(|k| fj.grad[k] * pj.jac[(th, k)]).sum();
            let quad = gam[th].component_mul(&contr).sum();
            f * f * (lap + (2.0 - m as f64) * drift / f + quad)
        })
        .collect())
}

/// `∇φ⊗∇φ` and its g-trace `|∇φ|²`.
pub fn phi_pullback(phi: &MapField, gamma: &TargetMetric, g: &AmbientMetric, x: &[f64]) -> Result<(SymTensor, f64)> {
    let pj = phi.jet(x)?;
    let f = g.factor_at(x)?;
    let t = pullback_from_jet(&pj, gamma)?;
    let tr = f * f * t.trace();
    Ok((SymTensor::new(TensorKind::MapPullback, t), tr))
}

pub(crate) fn pullback_from_jet(pj: &MapJet, gamma: &TargetMetric) -> Result<DMatrix<f64>> {
    let gf = gamma.factor_at(&pj.value)?;
    Ok(pj.jac.transpose() * &pj.jac / (gf * gf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cigar() -> AmbientMetric {
        AmbientMetric::new(2, RadialProfile::Cigar).unwrap()
    }

    #[test]
    fn flat_metric_is_trivial() {
        let g = AmbientMetric::euclidean(3);
        let x = [0.3, -1.0, 2.0];
        assert!(christoffel(&g, &x).unwrap().iter().all(|c| c.abs().max() == 0.0));
        assert_eq!(ricci(&g, &x).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn cigar_gauss_curvature() {
        let g = cigar();
        assert!((gauss_curvature_2d(&g, &[0.0, 0.0]).unwrap() - 2.0).abs() < 1e-14);
        let x = [1.0, 0.0];
        let k = gauss_curvature_2d(&g, &x).unwrap();
        assert!((k - 1.0).abs() < 1e-14);
        let ric = ricci(&g, &x).unwrap();
        let gt = g.tensor(&x).unwrap();
        assert!((ric.data - gt * k).abs().max() < 1e-14);
    }

    #[test]
    fn round_sphere_is_einstein() {
        let g = AmbientMetric::new(3, RadialProfile::RoundSphereChart).unwrap();
        let x = [0.3, 0.0, 0.0];
        let ric = ricci(&g, &x).unwrap();
        assert!((ric.data - g.tensor(&x).unwrap() * 2.0).abs().max() < 1e-13);
        assert!((scalar_curvature(&g, &[0.2, 0.5, -0.1]).unwrap() - 6.0).abs() < 1e-12);
        let g2 = AmbientMetric::new(2, RadialProfile::RoundSphereChart).unwrap();
        assert!((gauss_curvature_2d(&g2, &[0.4, -0.7]).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn flat_hessians_and_laplacians() {
        let g = AmbientMetric::euclidean(3);
        let h = ScalarField::Radial(RadialProfile::Quadratic { c0: 0.0, c2: 0.5 });
        let hess = hessian(&g, &h, &[0.2, 0.1, 0.3]).unwrap();
        assert!((hess.data - DMatrix::identity(3, 3)).abs().max() < 1e-14);
        let lin = ScalarField::Affine { coeffs: vec![1.0, 0.0, 0.0], offset: 0.0 };
        assert_eq!(hessian(&g, &lin, &[1.0, 2.0, 3.0]).unwrap().max_abs(), 0.0);
        assert_eq!(grad_laplacian(&g, &lin, &[1.0, 2.0, 3.0]).unwrap().grad_norm_sq, 1.0);
        let sq = ScalarField::Radial(RadialProfile::Quadratic { c0: 0.0, c2: 1.0 });
        assert!((grad_laplacian(&g, &sq, &[0.5, 0.5, 0.1]).unwrap().laplacian - 6.0).abs() < 1e-13);
    }

    #[test]
    fn cigar_potential_hessian_cancels_ricci() {
        let g = cigar();
        let f = ScalarField::Radial(RadialProfile::LogOnePlusSquare { scale: -1.0 });
        let x = [1.0, 0.0];
        let sum = hessian(&g, &f, &x).unwrap().data + ricci(&g, &x).unwrap().data;
        assert!(sum.abs().max() < 1e-14);
    }

    #[test]
    fn tension_examples() {
        let g = AmbientMetric::euclidean(3);
        let gam = TargetMetric::euclidean(2);
        let konst = MapField::Constant(vec![1.0, 2.0]);
        assert_eq!(tension_field(&konst, &g, &gam, &[0.1, 0.2, 0.3]).unwrap(), vec![0.0, 0.0]);
        let radial = MapField::Radial {
            profile: RadialProfile::Linear { scale: 1.0 },
            direction: vec![1.0, 0.0],
            base: vec![0.0, 0.0],
        };
        let tau = tension_field(&radial, &g, &gam, &[1.0, 0.0, 0.0]).unwrap();
        assert!((tau[0] - 2.0).abs() < 1e-14 && tau[1].abs() < 1e-14);
        // Identity between equal conformal structures is harmonic.
        let s = AmbientMetric::new(3, RadialProfile::RoundSphereChart).unwrap();
        let t = TargetMetric::new(3, RadialProfile::RoundSphereChart).unwrap();
        let tau = tension_field(&MapField::identity(3), &s, &t, &[0.4, -0.3, 0.8]).unwrap();
        assert!(tau.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn pullback_examples() {
        let g = AmbientMetric::euclidean(2);
        let gam = TargetMetric::euclidean(2);
        let proj = MapField::Affine { matrix: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]), offset: vec![0.0; 2] };
        let (t, tr) = phi_pullback(&proj, &gam, &g, &[0.3, 0.9]).unwrap();
        assert_eq!(t.data, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(tr, 1.0);
        let radial = MapField::Radial {
            profile: RadialProfile::Linear { scale: 1.0 },
            direction: vec![1.0],
            base: vec![0.0],
        };
        let (t, _) = phi_pullback(&radial, &TargetMetric::euclidean(1), &g, &[0.0, 1.0]).unwrap();
        assert!((t.data - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])).abs().max() < 1e-15);
    }
}
