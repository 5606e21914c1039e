use super::profile::{RadialProfile, TAYLOR_RADIUS};
use crate::error::{GeoError, Result};
use crate::numerics::Jet;
use nalgebra::DMatrix;
use std::fmt;
use std::sync::Arc;

/// Value, gradient and Hessian (Euclidean partials) of a scalar at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointJet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
}

impl PointJet {
    pub fn constant(value: f64, dim: usize) -> Self {
        PointJet { value, grad: vec![0.0; dim], hess: DMatrix::zeros(dim, dim) }
    }

    /// Cartesian jet of `x ↦ p(‖x‖)` from the radial jet of `p`.
    pub fn from_radial(radial: Jet, x: &[f64], smooth_at_origin: bool) -> Result<Self> {
        let m = x.len();
        let r = norm(x);
        if r < TAYLOR_RADIUS {
            if !smooth_at_origin {
                return Err(GeoError::Singular(format!("radial field is not smooth at r = {r:e}")));
            }
            let grad = x.iter().map(|xi| radial.d2 * xi).collect();
            return Ok(PointJet { value: radial.value, grad, hess: DMatrix::identity(m, m) * radial.d2 });
        }
        let grad = x.iter().map(|xi| radial.d1 * xi / r).collect();
        let a = radial.d2 / (r * r) - radial.d1 / (r * r * r);
        let hess = DMatrix::from_fn(m, m, |i, j| a * x[i] * x[j] + if i == j { radial.d1 / r } else { 0.0 });
        Ok(PointJet { value: radial.value, grad, hess })
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

type ScalarRule = Arc<dyn Fn(&[f64]) -> PointJet + Send + Sync>;

/// A real function on ℝ^m with first and second partials.
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    Radial(RadialProfile),
    /// `offset + coeffs · x`
    Affine { coeffs: Vec<f64>, offset: f64 },
    Custom { name: String, rule: ScalarRule },
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::Radial(p) => write!(f, "Radial({p:?})"),
            ScalarField::Affine { coeffs, offset } => write!(f, "Affine({coeffs:?}, {offset})"),
            ScalarField::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl ScalarField {
    pub fn custom<F>(name: &str, rule: F) -> Self
    where
        F: Fn(&[f64]) -> PointJet + Send + Sync + 'static,
    {
        ScalarField::Custom { name: name.to_string(), rule: Arc::new(rule) }
    }

    pub fn jet(&self, x: &[f64]) -> Result<PointJet> {
        let m = x.len();
        match self {
            ScalarField::Constant(c) => Ok(PointJet::constant(*c, m)),
            ScalarField::Radial(p) => PointJet::from_radial(p.eval(norm(x)), x, p.smooth_at_origin()),
            ScalarField::Affine { coeffs, offset } => {
                if coeffs.len() != m {
                    return Err(GeoError::Dimension { expected: coeffs.len(), got: m });
                }
                let value = offset + coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>();
                Ok(PointJet { value, grad: coeffs.clone(), hess: DMatrix::zeros(m, m) })
            }
            ScalarField::Custom { rule, .. } => Ok(rule(x)),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            ScalarField::Radial(p) => Ok(p.value(norm(x))),
            _ => Ok(self.jet(x)?.value),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ScalarField::Constant(_) => true,
            ScalarField::Radial(p) => p.is_constant(),
            ScalarField::Affine { coeffs, .. } => coeffs.iter().all(|c| *c == 0.0),
            ScalarField::Custom { .. } => false,
        }
    }
}

/// Value, Jacobian `∂φ^α/∂x_k` (n×m) and per-component Hessians of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapJet {
    pub value: Vec<f64>,
    pub jac: DMatrix<f64>,
    pub hess: Vec<DMatrix<f64>>,
}

/// A map ℝ^m → ℝⁿ with first and second partials.
#[derive(Debug, Clone)]
pub enum MapField {
    Constant(Vec<f64>),
    /// `x ↦ base + p(‖x‖) · direction` with `direction` a unit vector.
    Radial { profile: RadialProfile, direction: Vec<f64>, base: Vec<f64> },
    /// `x ↦ matrix · x + offset`
    Affine { matrix: DMatrix<f64>, offset: Vec<f64> },
    Components(Vec<ScalarField>),
}

impl MapField {
    pub fn target_dim(&self) -> usize {
        match self {
            MapField::Constant(v) => v.len(),
            MapField::Radial { direction, .. } => direction.len(),
            MapField::Affine { matrix, .. } => matrix.nrows(),
            MapField::Components(c) => c.len(),
        }
    }

    pub fn identity(m: usize) -> Self {
        MapField::Affine { matrix: DMatrix::identity(m, m), offset: vec![0.0; m] }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            MapField::Constant(_) => true,
            MapField::Radial { profile, .. } => profile.is_constant(),
            MapField::Affine { matrix, .. } => matrix.iter().all(|v| *v == 0.0),
            MapField::Components(c) => c.iter().all(ScalarField::is_constant),
        }
    }

    pub fn jet(&self, x: &[f64]) -> Result<MapJet> {
        let m = x.len();
        match self {
            MapField::Constant(v) => Ok(MapJet {
                value: v.clone(),
                jac: DMatrix::zeros(v.len(), m),
                hess: vec![DMatrix::zeros(m, m); v.len()],
            }),
            MapField::Radial { profile, direction, base } => {
                let s = PointJet::from_radial(profile.eval(norm(x)), x, profile.smooth_at_origin())?;
                let n = direction.len();
                let value = (0..n).map(|a| base.get(a).copied().unwrap_or(0.0) + s.value * direction[a]).collect();
                let jac = DMatrix::from_fn(n, m, |a, k| direction[a] * s.grad[k]);
                let hess = direction.iter().map(|d| &s.hess * *d).collect();
                Ok(MapJet { value, jac, hess })
            }
            MapField::Affine { matrix, offset } => {
                if matrix.ncols() != m {
                    return Err(GeoError::Dimension { expected: matrix.ncols(), got: m });
                }
                let n = matrix.nrows();
                let value = (0..n).map(|a| offset[a] + (0..m).map(|k| matrix[(a, k)] * x[k]).sum::<f64>()).collect();
                Ok(MapJet { value, jac: matrix.clone(), hess: vec![DMatrix::zeros(m, m); n] })
            }
            MapField::Components(c) => {
                let jets = c.iter().map(|s| s.jet(x)).collect::<Result<Vec<_>>>()?;
                let n = jets.len();
                Ok(MapJet {
                    value: jets.iter().map(|j| j.value).collect(),
                    jac: DMatrix::from_fn(n, m, |a, k| jets[a].grad[k]),
                    hess: jets.into_iter().map(|j| j.hess).collect(),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fd;

    #[test]
    fn radial_jet_matches_differences() {
        let f = ScalarField::Radial(RadialProfile::LogOnePlusSquare { scale: -1.0 });
        let x = [0.7, -0.4, 0.2];
        let j = f.jet(&x).unwrap();
        for k in 0..3 {
            let g = fd::partial(|p| vec![f.value(p).unwrap()], &x, k, 1e-4)[0];
            assert!((g - j.grad[k]).abs() < 1e-10);
            let row = fd::partial(|p| f.jet(p).unwrap().grad, &x, k, 1e-4);
            for l in 0..3 {
                assert!((row[l] - j.hess[(k, l)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn origin_requires_smoothness() {
        let bad = ScalarField::Radial(RadialProfile::Log { scale: 1.0 });
        assert!(bad.jet(&[0.0, 0.0]).is_err());
        let good = ScalarField::Radial(RadialProfile::Quadratic { c0: 0.0, c2: 0.25 });
        let j = good.jet(&[0.0, 0.0]).unwrap();
        assert_eq!(j.hess[(0, 0)], 0.5);
    }
}
