//! Fourier differentiation on the periodic square `[0, 2π)²` and on closed polygons.
//!
//! Fields are stored row-major: entry `i * n + j` sits at `(x₁, x₂) = (i h, j h)`.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::TAU;
use std::sync::Arc;

#[derive(Clone)]
pub struct PeriodicGrid {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).finish()
    }
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        PeriodicGrid { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h]
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|k| {
            let [x, y] = self.point(k);
            f(x, y)
        }).collect()
    }

    fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n as i64;
        let k = k as i64;
        if 2 * k < n { k as f64 } else { (k - n) as f64 }
    }

    /// Derivative along `axis` (0 for x₁, 1 for x₂) of the given `order`.
    pub fn derivative(&self, field: &[f64], axis: usize, order: u32) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let scale = 1.0 / n as f64;
        for l in 0..n {
            for (k, c) in line.iter_mut().enumerate() {
                let idx = if axis == 0 { k * n + l } else { l * n + k };
                *c = Complex64::new(field[idx], 0.0);
            }
            self.forward.process(&mut line);
            for (k, c) in line.iter_mut().enumerate() {
                let w = self.wavenumber(k);
                let nyquist = n.is_multiple_of(2) && k == n / 2;
                if nyquist && order % 2 == 1 {
                    *c = Complex64::new(0.0, 0.0);
                    continue;
                }
                let factor = Complex64::new(0.0, w).powu(order);
                *c *= factor * scale;
            }
            self.inverse.process(&mut line);
            for (k, c) in line.iter().enumerate() {
                let idx = if axis == 0 { k * n + l } else { l * n + k };
                out[idx] = c.re;
            }
        }
        out
    }

    pub fn dx(&self, field: &[f64]) -> Vec<f64> {
        self.derivative(field, 0, 1)
    }

    pub fn dy(&self, field: &[f64]) -> Vec<f64> {
        self.derivative(field, 1, 1)
    }

    pub fn gradient(&self, field: &[f64]) -> [Vec<f64>; 2] {
        [self.dx(field), self.dy(field)]
    }

    /// Integral over the torus of the sampled integrand (trapezoid, spectrally accurate).
    pub fn integrate(&self, field: &[f64]) -> f64 {
        let h = self.spacing();
        field.iter().sum::<f64>() * h * h
    }
}

thread_local! {
    static PLANNER: std::cell::RefCell<FftPlanner<f64>> = std::cell::RefCell::new(FftPlanner::new());
}

/// First and second derivatives of a closed planar polygon `z_j = x_j + i y_j`
/// with respect to the vertex label, treating it as `n`-periodic.
pub fn periodic_label_derivatives(points: &[[f64; 2]]) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let n = points.len();
    let (forward, inverse) =
        PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        });
    let mut spec: Vec<Complex64> = points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
    forward.process(&mut spec);
    let scale = 1.0 / n as f64;
    let mut d1 = spec.clone();
    let mut d2 = spec;
    for k in 0..n {
        let ki = k as i64;
        let w = TAU / n as f64 * if 2 * ki < n as i64 { ki as f64 } else { (ki - n as i64) as f64 };
        let nyquist = n.is_multiple_of(2) && k == n / 2;
        d1[k] = if nyquist { Complex64::new(0.0, 0.0) } else { d1[k] * Complex64::new(0.0, w * scale) };
        d2[k] *= -w * w * scale;
    }
    inverse.process(&mut d1);
    inverse.process(&mut d2);
    let split = |v: Vec<Complex64>| v.into_iter().map(|c| [c.re, c.im]).collect();
    (split(d1), split(d2))
}

/// Multiplies the Fourier coefficients of a closed polygon, in the vertex label,
/// by `exp(−36 (|k| / k_max)^order)`.
pub fn filter_periodic_points(points: &[[f64; 2]], order: i32) -> Vec<[f64; 2]> {
    let n = points.len();
    let (forward, inverse) =
        PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        });
    let mut spec: Vec<Complex64> = points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
    forward.process(&mut spec);
    let k_max = (n / 2) as f64;
    for (k, c) in spec.iter_mut().enumerate() {
        let wave = if 2 * k < n { k } else { n - k } as f64;
        *c *= (-36.0 * (wave / k_max).powi(order)).exp() / n as f64;
    }
    inverse.process(&mut spec);
    spec.into_iter().map(|c| [c.re, c.im]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_keeps_smooth_polygons_and_damps_the_sawtooth() {
        let n = 64;
        let w = TAU / n as f64;
        let circle: Vec<[f64; 2]> = (0..n).map(|j| [(w * j as f64).cos(), (w * j as f64).sin()]).collect();
        let out = filter_periodic_points(&circle, 36);
        assert!(circle.iter().zip(&out).all(|(a, b)| (a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15));
        let saw: Vec<[f64; 2]> = circle.iter().enumerate().map(|(j, p)| [p[0] + 1e-3 * (-1.0_f64).powi(j as i32), p[1]]).collect();
        let out = filter_periodic_points(&saw, 36);
        let left = out.iter().zip(&circle).map(|(a, b)| (a[0] - b[0]).abs()).fold(0.0, f64::max);
        assert!(left < 1e-15, "{left}");
    }

    #[test]
    fn polygon_derivatives_of_a_circle() {
        let n = 24;
        let w = TAU / n as f64;
        let pts: Vec<[f64; 2]> = (0..n).map(|j| [(w * j as f64).cos(), (w * j as f64).sin()]).collect();
        let (d1, d2) = periodic_label_derivatives(&pts);
        for j in 0..n {
            assert!((d1[j][0] + w * pts[j][1]).abs() < 1e-13 && (d1[j][1] - w * pts[j][0]).abs() < 1e-13);
            assert!((d2[j][0] + w * w * pts[j][0]).abs() < 1e-13);
        }
    }

    #[test]
    fn differentiates_trig_exactly() {
        let g = PeriodicGrid::new(32);
        let f = g.sample(|x, y| (2.0 * x).sin() * y.cos() + 0.5 * (x + 3.0 * y).cos());
        let fx = g.dx(&f);
        let fyy = g.derivative(&f, 1, 2);
        for k in (0..g.len()).step_by(37) {
            let [x, y] = g.point(k);
            let ex = 2.0 * (2.0 * x).cos() * y.cos() - 0.5 * (x + 3.0 * y).sin();
            let eyy = -(2.0 * x).sin() * y.cos() - 4.5 * (x + 3.0 * y).cos();
            assert!((fx[k] - ex).abs() < 1e-12);
            assert!((fyy[k] - eyy).abs() < 1e-11);
        }
    }
}
