//! Coordinate spheres `|x| = R` in a radial conformal ambient.

use crate::conformal_geometry::{AmbientMetric, ScalarField};
use crate::error::{GeoError, Result};
use crate::rh_flow::conjugate_heat::unit_sphere_area;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSurface {
    radius: f64,
    dim: usize,
}

impl SphereSurface {
    /// Sphere of radius `radius` in an `dim`-dimensional ambient.
    pub fn new(radius: f64, dim: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeoError::Domain(format!("sphere radius {radius}")));
        }
        if dim < 2 {
            return Err(GeoError::Dimension { expected: 2, got: dim });
        }
        Ok(SphereSurface { radius, dim })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Point on the sphere along the first axis.
    pub fn pole(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.dim];
        p[0] = self.radius;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereGeometry {
    pub factor: f64,
    pub factor_slope: f64,
    /// Each principal curvature w.r.t. the inward normal `−F∂_r`.
    pub principal: f64,
    pub mean_curvature: f64,
    /// Induced measure relative to the Euclidean one, `F^{−(m−1)}`.
    pub area_density: f64,
    pub area: f64,
}

pub fn sphere_geometry(s: &SphereSurface, metric: &AmbientMetric) -> Result<SphereGeometry> {
    if metric.dim() != s.dim {
        return Err(GeoError::Dimension { expected: s.dim, got: metric.dim() });
    }
    let jet = metric.factor().eval_positive(s.radius)?;
    let k = jet.value / s.radius - jet.d1;
    let m1 = (s.dim - 1) as f64;
    let density = jet.value.powf(-m1);
    Ok(SphereGeometry {
        factor: jet.value,
        factor_slope: jet.d1,
        principal: k,
        mean_curvature: m1 * k,
        area_density: density,
        area: density * unit_sphere_area(s.dim) * s.radius.powf(m1),
    })
}

/// `H + e f` on a sphere, with `e f = −F ∂_r f` and `f` radial about the origin.
pub fn sphere_soliton_residual(s: &SphereSurface, metric: &AmbientMetric, potential: &ScalarField) -> Result<f64> {
    let geo = sphere_geometry(s, metric)?;
    let jet = potential.jet(&s.pole())?;
    Ok(geo.mean_curvature - geo.factor * jet.grad[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal_geometry::RadialProfile;

    #[test]
    fn closed_form_curvatures() {
        let e3 = AmbientMetric::euclidean(3);
        let g = sphere_geometry(&SphereSurface::new(2.0, 3).unwrap(), &e3).unwrap();
        assert_eq!(g.mean_curvature, 1.0);
        assert!((g.area - 16.0 * std::f64::consts::PI).abs() < 1e-12);

        let cigar = AmbientMetric::new(2, RadialProfile::Cigar).unwrap();
        let g = sphere_geometry(&SphereSurface::new(1.0, 2).unwrap(), &cigar).unwrap();
        assert!((g.mean_curvature - 0.5_f64.sqrt()).abs() < 1e-15);

        let round = AmbientMetric::new(3, RadialProfile::RoundSphereChart).unwrap();
        let g = sphere_geometry(&SphereSurface::new(1.0, 3).unwrap(), &round).unwrap();
        assert!(g.mean_curvature.abs() < 1e-15);
    }

    #[test]
    fn cigar_curvature_is_first_variation_of_length() {
        // Length L(R) = 2πR/F(R); moving along e = −F∂_r at unit speed gives dL/dt = −∫H ds.
        let f = |r: f64| (1.0 + r * r).sqrt();
        let len = |r: f64| std::f64::consts::TAU * r / f(r);
        let (r, h) = (1.0, 1e-5);
        let d_len = -f(r) * (len(r + h) - len(r - h)) / (2.0 * h);
        let cigar = AmbientMetric::new(2, RadialProfile::Cigar).unwrap();
        let g = sphere_geometry(&SphereSurface::new(r, 2).unwrap(), &cigar).unwrap();
        assert!((d_len + g.mean_curvature * g.area).abs() < 1e-9);
    }

    #[test]
    fn invalid_spheres() {
        assert!(SphereSurface::new(0.0, 3).is_err());
        assert!(SphereSurface::new(1.0, 1).is_err());
        let g = sphere_geometry(&SphereSurface::new(1.0, 3).unwrap(), &AmbientMetric::euclidean(2));
        assert!(matches!(g, Err(GeoError::Dimension { .. })));
    }
}
