//! Weighted area and the Huisken quantity.

use crate::conformal_geometry::{AmbientMetric, ScalarField};
use crate::error::{GeoError, Result};
use crate::mcf::{curve_geometry, soliton_residual, sphere_geometry, Hypersurface};
use crate::rh_flow::Background;
use crate::soliton_ode::SolitonClass;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Quadrature of `weight(p)·e^{−f}` against the induced measure.
fn integrate_weighted(
    surface: &Hypersurface,
    metric: &AmbientMetric,
    potential: &ScalarField,
    weight: &[f64],
) -> Result<f64> {
    match surface {
        Hypersurface::Sphere(s) => {
            let area = sphere_geometry(s, metric)?.area;
            Ok(weight[0] * (-potential.value(&s.pole())?).exp() * area)
        }
        Hypersurface::Curve(c) => {
            let geo = curve_geometry(c, metric)?;
            let n = c.len();
            let mut sum = 0.0;
            for (i, p) in c.points().iter().enumerate() {
                let end = !c.is_closed() && (i == 0 || i == n - 1);
                let w = if end { 0.5 } else { 1.0 };
                sum += w * weight[i] * (-potential.value(p)?).exp() * geo.line_element[i];
            }
            Ok(sum)
        }
    }
}

/// `∫ e^{−f} dA`. Closed curves use the periodic trapezoid rule in the vertex label.
pub fn weighted_area(surface: &Hypersurface, metric: &AmbientMetric, potential: &ScalarField) -> Result<f64> {
    let n = match surface {
        Hypersurface::Sphere(_) => 1,
        Hypersurface::Curve(c) => c.len(),
    };
    integrate_weighted(surface, metric, potential, &vec![1.0; n])
}

/// `∫ (H + e f)² e^{−f} dA`.
pub fn residual_integral(surface: &Hypersurface, metric: &AmbientMetric, potential: &ScalarField) -> Result<f64> {
    let res = soliton_residual(surface, metric, potential)?;
    let sq: Vec<f64> = res.values.iter().map(|v| v * v).collect();
    integrate_weighted(surface, metric, potential, &sq)
}

/// `[4π|T − t|]^{−(m−1)/2}` for shrinking and expanding classes, 1 for steady.
pub fn phi_prefactor(class: SolitonClass, m: usize, horizon: f64, t: f64) -> Result<f64> {
    let gap = match class {
        SolitonClass::Steady => return Ok(1.0),
        SolitonClass::Shrinking => horizon - t,
        SolitonClass::Expanding => t - horizon,
    };
    if !(gap > 0.0) {
        return Err(GeoError::Domain(format!("t = {t} outside the {class:?} interval (T = {horizon})")));
    }
    Ok((4.0 * PI * gap).powf(-0.5 * (m as f64 - 1.0)))
}

pub fn huisken_phi(times: &[f64], areas: &[f64], class: SolitonClass, m: usize, horizon: f64) -> Result<Vec<f64>> {
    if times.len() != areas.len() {
        return Err(GeoError::Dimension { expected: times.len(), got: areas.len() });
    }
    times.iter().zip(areas).map(|(t, a)| Ok(phi_prefactor(class, m, horizon, *t)? * a)).collect()
}

/// `Area_f̄`, `Φ` and the residual integral along a surface evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAreaSeries {
    pub class: SolitonClass,
    pub dim: usize,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub area: Vec<f64>,
    pub phi: Vec<f64>,
    pub residual_integral: Vec<f64>,
}

impl WeightedAreaSeries {
    pub fn new(class: SolitonClass, dim: usize, horizon: f64) -> Self {
        WeightedAreaSeries {
            class,
            dim,
            horizon,
            times: Vec::new(),
            area: Vec::new(),
            phi: Vec::new(),
            residual_integral: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Appends the values of `surface` against the background slice at `t`.
    pub fn record<B: Background + ?Sized>(&mut self, t: f64, surface: &Hypersurface, bg: &B) -> Result<()> {
        let slice = bg.slice_at(t)?;
        let area = weighted_area(surface, &slice.metric, &slice.potential)?;
        let pre = phi_prefactor(self.class, self.dim, self.horizon, t)?;
        self.times.push(t);
        self.area.push(area);
        self.phi.push(pre * area);
        self.residual_integral.push(residual_integral(surface, &slice.metric, &slice.potential)?);
        Ok(())
    }

    /// Central differences of Φ at interior samples, as `(t, dΦ/dt)`.
    pub fn phi_rate(&self) -> Vec<(f64, f64)> {
        (1..self.len().saturating_sub(1))
            .map(|k| (self.times[k], (self.phi[k + 1] - self.phi[k - 1]) / (self.times[k + 1] - self.times[k - 1])))
            .collect()
    }

    /// `−prefactor · ∫(H + e f̄)² e^{−f̄} dA` at sample `k`.
    pub fn predicted_rate(&self, k: usize) -> Result<f64> {
        Ok(-phi_prefactor(self.class, self.dim, self.horizon, self.times[k])? * self.residual_integral[k])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,area_f,phi,residual_integral\n");
        for k in 0..self.len() {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.times[k], self.area[k], self.phi[k], self.residual_integral[k]
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal_geometry::RadialProfile;
    use crate::mcf::{PlaneCurve, SphereSurface};

    #[test]
    fn closed_form_areas() {
        let zero = ScalarField::Constant(0.0);
        let circle: Hypersurface = PlaneCurve::circle([0.0, 0.0], 1.0, 64).unwrap().into();
        let a = weighted_area(&circle, &AmbientMetric::euclidean(2), &zero).unwrap();
        assert!((a - 2.0 * PI).abs() < 1e-12, "{a}");
        let cigar = AmbientMetric::new(2, RadialProfile::Cigar).unwrap();
        let a = weighted_area(&circle, &cigar, &zero).unwrap();
        assert!((a - PI * 2.0_f64.sqrt()).abs() < 1e-12, "{a}");
        let quarter = ScalarField::Radial(RadialProfile::Quadratic { c0: 0.0, c2: 0.25 });
        let sphere: Hypersurface = SphereSurface::new(2.0, 3).unwrap().into();
        let a = weighted_area(&sphere, &AmbientMetric::euclidean(3), &quarter).unwrap();
        assert!((a - 16.0 * PI * (-1.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn periodic_trapezoid_converges_fast() {
        let f = ScalarField::Affine { coeffs: vec![0.3, 0.1], offset: 0.0 };
        let e2 = AmbientMetric::euclidean(2);
        let area = |n| {
            let c: Hypersurface = PlaneCurve::ellipse(3.0, 1.0, n).unwrap().into();
            weighted_area(&c, &e2, &f).unwrap()
        };
        let reference = area(1024);
        let coarse = (area(16) - reference).abs();
        let fine = (area(32) - reference).abs();
        assert!(coarse / fine > 1e2, "{coarse:e} {fine:e}");
    }

    #[test]
    fn prefactor_classes() {
        assert_eq!(phi_prefactor(SolitonClass::Steady, 3, 1.0, 7.0).unwrap(), 1.0);
        assert!((phi_prefactor(SolitonClass::Shrinking, 3, 1.0, 0.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!(phi_prefactor(SolitonClass::Shrinking, 3, 1.0, 1.5).is_err());
        assert!(phi_prefactor(SolitonClass::Expanding, 2, 1.0, 0.5).is_err());
        let phi = huisken_phi(&[0.0, 0.5], &[2.0, 2.0], SolitonClass::Shrinking, 2, 1.0).unwrap();
        assert!((phi[1] / phi[0] - 2.0_f64.sqrt()).abs() < 1e-14);
    }
}
