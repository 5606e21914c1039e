//! Dormand–Prince 5(4) embedded Runge–Kutta with adaptive step control.

use crate::error::{GeoError, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Rk45 {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Rk45 {
    fn default() -> Self {
        Rk45 { rtol: 1e-10, atol: 1e-12, h_min: 1e-14, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Rk45Stats {
    pub accepted: usize,
    pub rejected: usize,
}

impl Rk45 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Rk45 { rtol, atol, ..Default::default() }
    }

    /// Integrates from `t0` and returns the state at every entry of `t_out`,
    /// which must be monotone in the direction of integration.
    pub fn solve<F>(&self, mut rhs: F, t0: f64, y0: &[f64], t_out: &[f64]) -> Result<(Vec<Vec<f64>>, Rk45Stats)>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y0.len();
        let mut stats = Rk45Stats::default();
        let mut out = Vec::with_capacity(t_out.len());
        let mut t = t0;
        let mut y = y0.to_vec();
        let dir = match t_out.iter().find(|&&s| s != t0) {
            Some(&s) if s < t0 => -1.0,
            _ => 1.0,
        };
        let mut k = vec![vec![0.0; n]; 7];
        let mut ytmp = vec![0.0; n];
        let mut y5 = vec![0.0; n];
        let mut h = f64::NAN;
        for &target in t_out {
            if (target - t) * dir < 0.0 {
                return Err(GeoError::Precondition("output times must be monotone".into()));
            }
            if h.is_nan() {
                let span = (target - t).abs();
                h = if span > 0.0 { (span * 1e-3).min(1e-2).max(self.h_min) } else { 1e-6 };
            }
            while (target - t) * dir > 0.0 {
                if stats.accepted + stats.rejected > self.max_steps {
                    return Err(GeoError::StepUnderflow { at: t });
                }
                let remaining = (target - t).abs();
                let last = h >= remaining;
                let step = if last { remaining } else { h };
                let hs = dir * step;
                rhs(t, &y, &mut k[0])?;
                for s in 1..7 {
                    for i in 0..n {
                        let mut acc = y[i];
                        for (j, kj) in k.iter().enumerate().take(s) {
                            acc += hs * A[s][j] * kj[i];
                        }
                        ytmp[i] = acc;
                    }
                    let (head, tail) = k.split_at_mut(s);
                    let _ = head;
                    rhs(t + C[s] * hs, &ytmp, &mut tail[0])?;
                }
                let mut err2 = 0.0;
                for i in 0..n {
                    let mut s5 = 0.0;
                    let mut s4 = 0.0;
                    for s in 0..7 {
                        s5 += B5[s] * k[s][i];
                        s4 += B4[s] * k[s][i];
                    }
                    y5[i] = y[i] + hs * s5;
                    let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                    let e = hs * (s5 - s4) / sc;
                    err2 += e * e;
                }
                let err = (err2 / n.max(1) as f64).sqrt();
                if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
                    if step <= self.h_min {
                        return Err(GeoError::NonFinite { at: t });
                    }
                    h = step * 0.25;
                    stats.rejected += 1;
                    continue;
                }
                if err <= 1.0 {
                    t = if last { target } else { t + hs };
                    y.copy_from_slice(&y5);
                    stats.accepted += 1;
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    if !last {
                        h = step * fac;
                    } else {
                        h = h.max(step * fac);
                    }
                } else {
                    stats.rejected += 1;
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                    if h < self.h_min {
                        return Err(GeoError::StepUnderflow { at: t });
                    }
                }
            }
            out.push(y.clone());
        }
        Ok((out, stats))
    }

    /// Convenience wrapper returning only the final state.
    pub fn solve_to<F>(&self, rhs: F, t0: f64, y0: &[f64], t1: f64) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let (mut out, _) = self.solve(rhs, t0, y0, &[t1])?;
        Ok(out.pop().expect("one output"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let rk = Rk45::default();
        let y = rk
            .solve_to(
                |_, y, d| {
                    d[0] = -y[0];
                    Ok(())
                },
                0.0,
                &[1.0],
                3.0,
            )
            .unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let rk = Rk45::default();
        let (ys, _) = rk
            .solve(
                |_, y, d| {
                    d[0] = y[1];
                    d[1] = -y[0];
                    Ok(())
                },
                1.0,
                &[1.0f64.cos(), -1.0f64.sin()],
                &[0.5, 0.0, -2.0],
            )
            .unwrap();
        for (y, t) in ys.iter().zip([0.5f64, 0.0, -2.0]) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn fifth_order_error_scaling() {
        let err_at = |tol: f64| {
            let rk = Rk45::with_tolerances(tol, tol * 1e-2);
            let y = rk
                .solve_to(
                    |t, y, d| {
                        d[0] = y[0] * t.cos();
                        Ok(())
                    },
                    0.0,
                    &[1.0],
                    4.0,
                )
                .unwrap();
            (y[0] - 4.0f64.sin().exp()).abs()
        };
        assert!(err_at(1e-10) < err_at(1e-6));
    }
}
