//! Thomas algorithm for tridiagonal and cyclic tridiagonal systems.

use crate::error::{GeoError, Result};

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(GeoError::Dimension { expected: n, got: rhs.len() });
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(GeoError::Singular("zero pivot in tridiagonal solve".into()));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 {
            return Err(GeoError::Singular("zero pivot in tridiagonal solve".into()));
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Cyclic variant: `lower[0]` couples to `x[n-1]` and `upper[n-1]` to `x[0]`.
/// Sherman–Morrison reduction to two ordinary tridiagonal solves.
pub fn solve_cyclic(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(GeoError::Insufficient("cyclic system needs at least 3 unknowns".into()));
    }
    let alpha = upper[n - 1];
    let beta = lower[0];
    let gamma = -diag[0];
    let mut dd = diag.to_vec();
    dd[0] -= gamma;
    dd[n - 1] -= alpha * beta / gamma;
    let x = solve(lower, &dd, upper, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve(lower, &dd, upper, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64], cyclic: bool) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += lower[i] * x[i - 1];
                } else if cyclic {
                    v += lower[0] * x[n - 1];
                }
                if i + 1 < n {
                    v += upper[i] * x[i + 1];
                } else if cyclic {
                    v += upper[n - 1] * x[0];
                }
                v
            })
            .collect()
    }

    #[test]
    fn round_trip() {
        let n = 9;
        let lower: Vec<f64> = (0..n).map(|i| 0.3 + 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.7 + 0.02 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 3.0 + (i as f64).sin()).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        for cyclic in [false, true] {
            let b = apply(&lower, &diag, &upper, &x, cyclic);
            let sol = if cyclic {
                solve_cyclic(&lower, &diag, &upper, &b).unwrap()
            } else {
                solve(&lower, &diag, &upper, &b).unwrap()
            };
            for (a, e) in sol.iter().zip(&x) {
                assert!((a - e).abs() < 1e-13);
            }
        }
    }
}
