//! Ambient curvature and map data projected onto the frame of a plane curve:
//! `e₀` the inward unit normal and `T` the unit tangent.

use crate::conformal_geometry::{ricci, scalar_curvature, AmbientMetric, MapField, TargetMetric};
use crate::error::Result;
use crate::mcf::CurveGeometry;
use crate::numerics::fd::ORACLE_STEP;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameTerms {
    pub ric_tt: f64,
    pub ric_nt: f64,
    pub ric_nn: f64,
    pub scalar: f64,
    /// `e₀(R)`, by a central difference along the normal.
    pub normal_scalar_slope: f64,
    /// `γ(dφ(T), dφ(T))`.
    pub map_tangent_sq: f64,
    /// `γ(dφ(e₀), dφ(e₀))`.
    pub map_normal_sq: f64,
    /// `γ(dφ(T), dφ(e₀))`.
    pub map_cross: f64,
}

fn quad(m: &nalgebra::DMatrix<f64>, a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (0..2).map(|i| (0..2).map(|j| a[i] * m[(i, j)] * b[j]).sum::<f64>()).sum()
}

pub fn frame_terms(
    points: &[[f64; 2]],
    geo: &CurveGeometry,
    metric: &AmbientMetric,
    map: &MapField,
    target: &TargetMetric,
) -> Result<Vec<FrameTerms>> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let e = geo.unit_normal(i);
            let t = geo.unit_tangent(i);
            let ric = ricci(metric, p)?.data;
            let h = ORACLE_STEP;
            let plus = scalar_curvature(metric, &[p[0] + h * e[0], p[1] + h * e[1]])?;
            let minus = scalar_curvature(metric, &[p[0] - h * e[0], p[1] - h * e[1]])?;
            let (map_tangent_sq, map_normal_sq, map_cross) = if map.is_constant() {
                (0.0, 0.0, 0.0)
            } else {
                let jet = map.jet(p)?;
                let g = target.factor_at(&jet.value)?;
                let pair = |v: &[f64; 2], w: &[f64; 2]| -> f64 {
                    (0..jet.value.len())
                        .map(|a| {
                            (jet.jac[(a, 0)] * v[0] + jet.jac[(a, 1)] * v[1]) * (jet.jac[(a, 0)] * w[0] + jet.jac[(a, 1)] * w[1])
                        })
                        .sum::<f64>()
                        / (g * g)
                };
                (pair(&t, &t), pair(&e, &e), pair(&t, &e))
            };
            Ok(FrameTerms {
                ric_tt: quad(&ric, &t, &t),
                ric_nt: quad(&ric, &e, &t),
                ric_nn: quad(&ric, &e, &e),
                scalar: scalar_curvature(metric, p)?,
                normal_scalar_slope: (plus - minus) / (2.0 * h),
                map_tangent_sq,
                map_normal_sq,
                map_cross,
            })
        })
        .collect()
}
