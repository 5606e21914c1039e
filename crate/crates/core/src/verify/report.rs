use serde::Serialize;
use std::fmt;

pub const REL_FLOOR: f64 = 1e-14;

/// How a report's pass flag is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gate {
    Relative,
    Absolute,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Resolution {
    pub h: Option<f64>,
    pub dt: Option<f64>,
    pub eps: Option<f64>,
    pub n: Option<usize>,
}

impl Resolution {
    pub fn h(mut self, h: f64) -> Self {
        self.h = Some(h);
        self
    }
    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }
    pub fn eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }
    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }
}

/// A quantity computed two independent ways, with the comparison outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdReport {
    pub name: String,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub abs_err: f64,
    pub rel_err: f64,
    pub resolution: Resolution,
    pub tol: f64,
    pub gate: Gate,
    pub pass: bool,
}

impl FdReport {
    pub fn vector(name: &str, lhs: Vec<f64>, rhs: Vec<f64>, tol: f64, gate: Gate, resolution: Resolution) -> Self {
        let abs_err = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, |acc: f64, e| if e.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(e) });
        let scale = lhs.iter().chain(&rhs).map(|v| v.abs()).fold(REL_FLOOR, f64::max);
        let rel_err = abs_err / scale;
        let finite = abs_err.is_finite() && lhs.len() == rhs.len();
        let pass = finite
            && match gate {
                Gate::Relative => rel_err < tol,
                Gate::Absolute => abs_err < tol,
            };
        FdReport { name: name.to_string(), lhs, rhs, abs_err, rel_err, resolution, tol, gate, pass }
    }

    pub fn scalar(name: &str, lhs: f64, rhs: f64, tol: f64, gate: Gate, resolution: Resolution) -> Self {
        Self::vector(name, vec![lhs], vec![rhs], tol, gate, resolution)
    }

    pub fn csv_header() -> &'static str {
        "name,lhs,rhs,abs_err,rel_err,h,dt,eps,n,tol,gate,pass"
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let first = |v: &[f64]| v.first().map(|x| format!("{x:.17e}")).unwrap_or_default();
        format!(
            "{},{},{},{:.6e},{:.6e},{},{},{},{},{:e},{:?},{}",
            self.name,
            first(&self.lhs),
            first(&self.rhs),
            self.abs_err,
            self.rel_err,
            opt(self.resolution.h),
            opt(self.resolution.dt),
            opt(self.resolution.eps),
            self.resolution.n.map(|n| n.to_string()).unwrap_or_default(),
            self.tol,
            self.gate,
            self.pass
        )
    }
}

impl fmt::Display for FdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: abs={:.3e} rel={:.3e} tol={:.1e} ({:?})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.abs_err,
            self.rel_err,
            self.tol,
            self.gate
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_uses_floor() {
        let r = FdReport::scalar("zero", 0.0, 0.0, 1e-6, Gate::Relative, Resolution::default());
        assert_eq!(r.rel_err, 0.0);
        assert!(r.pass);
        let r = FdReport::scalar("x", 2.0, 1.0, 0.6, Gate::Relative, Resolution::default());
        assert!((r.rel_err - 0.5).abs() < 1e-15 && r.pass);
    }

    #[test]
    fn nan_never_passes() {
        let r = FdReport::scalar("nan", f64::NAN, 1.0, 1.0, Gate::Absolute, Resolution::default());
        assert!(!r.pass);
    }
}
