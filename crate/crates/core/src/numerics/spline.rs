//! Cubic splines: not-a-knot on a general increasing grid, and periodic on a
//! uniform grid.

use super::tridiag;
use crate::error::{GeoError, Result};

/// Value and first two derivatives of a one-variable function.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Jet { value, d1, d2 }
    }
}

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if y.len() != n {
            return Err(GeoError::Dimension { expected: n, got: y.len() });
        }
        if n < 4 {
            return Err(GeoError::Insufficient("not-a-knot spline needs at least 4 nodes".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeoError::Precondition("spline nodes must be strictly increasing".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        // Unknowns M_1..M_{n-2}; M_0 and M_{n-1} eliminated by the not-a-knot rows.
        let k = n - 2;
        let mut lower = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut upper = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for j in 0..k {
            let i = j + 1;
            lower[j] = h[i - 1];
            diag[j] = 2.0 * (h[i - 1] + h[i]);
            upper[j] = h[i];
            rhs[j] = 6.0 * (d[i] - d[i - 1]);
        }
        let (h0, h1) = (h[0], h[1]);
        diag[0] = h0 * (h0 + h1) / h1 + 2.0 * (h0 + h1);
        upper[0] = h1 - h0 * h0 / h1;
        let (ha, hb) = (h[n - 3], h[n - 2]);
        lower[k - 1] = ha - hb * hb / ha;
        diag[k - 1] = hb * (ha + hb) / ha + 2.0 * (ha + hb);
        let inner = tridiag::solve(&lower, &diag, &upper, &rhs)?;
        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&inner);
        m[0] = ((h0 + h1) * m[1] - h0 * m[2]) / h1;
        m[n - 1] = ((ha + hb) * m[n - 2] - hb * m[n - 3]) / ha;
        Ok(CubicSpline { x: x.to_vec(), y: y.to_vec(), m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Evaluates the spline; points outside the grid use the end cubic.
    pub fn eval(&self, t: f64) -> Jet {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        Jet { value, d1, d2 }
    }
}

/// Periodic cubic spline on the uniform parameter grid `0, 1, …, n-1` with period `n`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    y: Vec<f64>,
    m: Vec<f64>,
}

impl PeriodicSpline {
    pub fn new(y: &[f64]) -> Result<Self> {
        let n = y.len();
        if n < 3 {
            return Err(GeoError::Insufficient("periodic spline needs at least 3 nodes".into()));
        }
        let rhs: Vec<f64> = (0..n).map(|i| 6.0 * (y[(i + 1) % n] - 2.0 * y[i] + y[(i + n - 1) % n])).collect();
        let m = tridiag::solve_cyclic(&vec![1.0; n], &vec![4.0; n], &vec![1.0; n], &rhs)?;
        Ok(PeriodicSpline { y: y.to_vec(), m })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn eval(&self, s: f64) -> Jet {
        let n = self.y.len();
        let p = s.rem_euclid(n as f64);
        let i = (p.floor() as usize).min(n - 1);
        let j = (i + 1) % n;
        let b = p - i as f64;
        let a = 1.0 - b;
        let (m0, m1) = (self.m[i], self.m[j]);
        let (y0, y1) = (self.y[i], self.y[j]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) / 6.0;
        let d1 = (y1 - y0) - (3.0 * a * a - 1.0) * m0 / 6.0 + (3.0 * b * b - 1.0) * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        Jet { value, d1, d2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn not_a_knot_reproduces_cubics() {
        let x: Vec<f64> = (0..9).map(|i| (i as f64).powf(1.3) * 0.2).collect();
        let f = |t: f64| 2.0 - t + 0.5 * t * t - 0.3 * t * t * t;
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::not_a_knot(&x, &y).unwrap();
        for t in [0.05, 0.61, 1.7, 2.3] {
            let j = s.eval(t);
            assert!((j.value - f(t)).abs() < 1e-12);
            assert!((j.d1 - (-1.0 + t - 0.9 * t * t)).abs() < 1e-11);
            assert!((j.d2 - (1.0 - 1.8 * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_converges_on_trig() {
        let err = |n: usize| {
            let h = std::f64::consts::TAU / n as f64;
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
            let s = PeriodicSpline::new(&y).unwrap();
            (0..50)
                .map(|k| {
                    let p = k as f64 * n as f64 / 50.0 + 0.37;
                    (s.eval(p).value - (p * h).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
    }
}
