use crate::error::{GeoError, Result};
use crate::numerics::{CubicSpline, Jet};
use std::fmt;
use std::sync::Arc;

/// Below this radius smooth profiles are evaluated from their even Taylor expansion.
pub const TAYLOR_RADIUS: f64 = 1e-8;

type JetFn = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

/// A function of the radius `r = ‖x‖` with first and second derivatives.
#[derive(Clone)]
pub enum RadialProfile {
    Constant(f64),
    /// `c0 + c2 r²`
    Quadratic { c0: f64, c2: f64 },
    /// `√(1 + r²)`, the cigar conformal factor.
    Cigar,
    /// `(1 + r²) / 2`, the stereographic chart of the unit sphere.
    RoundSphereChart,
    /// `scale · log(1 + r²)`
    LogOnePlusSquare { scale: f64 },
    /// `scale · r`; vanishes at the origin, so only usable away from it.
    Linear { scale: f64 },
    /// `scale · log r`
    Log { scale: f64 },
    /// `outer · base(inner · r)`
    Scaled { base: Box<RadialProfile>, inner: f64, outer: f64 },
    /// Cubic not-a-knot spline through samples on an r-grid.
    Sampled { spline: CubicSpline, smooth_at_origin: bool },
    Custom { name: String, rule: JetFn, smooth_at_origin: bool },
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Constant(c) => write!(f, "Constant({c})"),
            RadialProfile::Quadratic { c0, c2 } => write!(f, "Quadratic({c0} + {c2} r²)"),
            RadialProfile::Cigar => write!(f, "Cigar"),
            RadialProfile::RoundSphereChart => write!(f, "RoundSphereChart"),
            RadialProfile::LogOnePlusSquare { scale } => write!(f, "{scale}·log(1+r²)"),
            RadialProfile::Linear { scale } => write!(f, "{scale}·r"),
            RadialProfile::Log { scale } => write!(f, "{scale}·log r"),
            RadialProfile::Scaled { base, inner, outer } => write!(f, "{outer}·({base:?})({inner}·r)"),
            RadialProfile::Sampled { spline, .. } => write!(f, "Sampled{:?}", spline.domain()),
            RadialProfile::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl RadialProfile {
    pub fn custom<F>(name: &str, smooth_at_origin: bool, rule: F) -> Self
    where
        F: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        RadialProfile::Custom { name: name.to_string(), rule: Arc::new(rule), smooth_at_origin }
    }

    pub fn sampled(r: &[f64], values: &[f64], smooth_at_origin: bool) -> Result<Self> {
        Ok(RadialProfile::Sampled { spline: CubicSpline::not_a_knot(r, values)?, smooth_at_origin })
    }

    /// Whether the profile extends evenly through the origin (so `p'(0) = 0`).
    pub fn smooth_at_origin(&self) -> bool {
        match self {
            RadialProfile::Linear { .. } | RadialProfile::Log { .. } => false,
            RadialProfile::Scaled { base, .. } => base.smooth_at_origin(),
            RadialProfile::Sampled { smooth_at_origin, .. } | RadialProfile::Custom { smooth_at_origin, .. } => {
                *smooth_at_origin
            }
            _ => true,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, RadialProfile::Constant(_))
    }

    fn raw(&self, r: f64) -> Jet {
        match self {
            RadialProfile::Constant(c) => Jet::new(*c, 0.0, 0.0),
            RadialProfile::Quadratic { c0, c2 } => Jet::new(c0 + c2 * r * r, 2.0 * c2 * r, 2.0 * c2),
            RadialProfile::Cigar => {
                let s = (1.0 + r * r).sqrt();
                Jet::new(s, r / s, 1.0 / (s * s * s))
            }
            RadialProfile::RoundSphereChart => Jet::new(0.5 * (1.0 + r * r), r, 1.0),
            RadialProfile::LogOnePlusSquare { scale } => {
                let q = 1.0 + r * r;
                Jet::new(scale * q.ln(), scale * 2.0 * r / q, scale * 2.0 * (1.0 - r * r) / (q * q))
            }
            RadialProfile::Linear { scale } => Jet::new(scale * r, *scale, 0.0),
            RadialProfile::Log { scale } => Jet::new(scale * r.ln(), scale / r, -scale / (r * r)),
            RadialProfile::Scaled { base, inner, outer } => {
                let j = base.eval(inner * r);
                Jet::new(outer * j.value, outer * inner * j.d1, outer * inner * inner * j.d2)
            }
            RadialProfile::Sampled { spline, .. } => spline.eval(r),
            RadialProfile::Custom { rule, .. } => rule(r),
        }
    }

    /// Value and derivatives at radius `r ≥ 0`.
    pub fn eval(&self, r: f64) -> Jet {
        if r < TAYLOR_RADIUS && self.smooth_at_origin() {
            let c = self.raw(0.0);
            return Jet::new(c.value + 0.5 * c.d2 * r * r, c.d2 * r, c.d2);
        }
        self.raw(r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).value
    }

    /// Evaluation as a conformal factor: must be strictly positive.
    pub fn eval_positive(&self, r: f64) -> Result<Jet> {
        let j = self.eval(r);
        if !(j.value > 0.0) || !j.value.is_finite() {
            return Err(GeoError::NonPositiveFactor { r, value: j.value });
        }
        Ok(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fd;

    #[test]
    fn closed_form_derivatives_match_differences() {
        let profiles = [
            RadialProfile::Cigar,
            RadialProfile::RoundSphereChart,
            RadialProfile::LogOnePlusSquare { scale: -1.0 },
            RadialProfile::Scaled { base: Box::new(RadialProfile::Cigar), inner: 0.3, outer: 2.0 },
            RadialProfile::Log { scale: 0.7 },
        ];
        for p in &profiles {
            for r in [0.4, 1.0, 2.5] {
                let j = p.eval(r);
                assert!((j.d1 - fd::d1(|s| p.value(s), r, 1e-3)).abs() < 1e-9, "{p:?}");
                assert!((j.d2 - fd::d2(|s| p.value(s), r, 1e-3)).abs() < 1e-7, "{p:?}");
            }
        }
    }

    #[test]
    fn taylor_branch_near_origin() {
        let j = RadialProfile::Cigar.eval(1e-10);
        assert_eq!(j.d2, 1.0);
        assert!((j.d1 - 1e-10).abs() < 1e-20);
    }

    #[test]
    fn rejects_nonpositive_factor() {
        assert!(RadialProfile::Linear { scale: 1.0 }.eval_positive(0.0).is_err());
    }
}
