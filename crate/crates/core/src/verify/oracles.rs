//! Brute-force finite-difference curvature, independent of the conformal
//! closed forms except where noted.

use crate::conformal_geometry::{christoffel, ricci, AmbientMetric, ScalarField};
use crate::error::Result;
use crate::numerics::fd::{self, ORACLE_STEP};
use nalgebra::DMatrix;

fn flatten(mats: &[DMatrix<f64>]) -> Vec<f64> {
    mats.iter().flat_map(|m| m.iter().copied()).collect()
}

/// Christoffel symbols from finite differences of the metric components.
pub fn fd_christoffel(metric: &AmbientMetric, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let m = metric.dim();
    metric.tensor(x)?;
    let dg: Vec<DMatrix<f64>> = (0..m)
        .map(|l| {
            let v = fd::partial(|p| metric.tensor(p).map(|g| g.iter().copied().collect()).unwrap_or_default(), x, l, ORACLE_STEP);
            DMatrix::from_column_slice(m, m, &v)
        })
        .collect();
    let ginv = metric.tensor(x)?.try_inverse().expect("conformal metric is invertible");
    Ok((0..m)
        .map(|k| {
            DMatrix::from_fn(m, m, |i, j| {
                0.5 * (0..m).map(|l| ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])).sum::<f64>()
            })
        })
        .collect())
}

/// Ricci tensor contracted from the Riemann tensor built out of the
/// Christoffel symbols and their finite differences.
pub fn fd_ricci(metric: &AmbientMetric, x: &[f64]) -> Result<DMatrix<f64>> {
    let m = metric.dim();
    let gam = christoffel(metric, x)?;
    // dgam[a][k][(i,j)] = ∂_a Γ^k_ij
    let dgam: Vec<Vec<DMatrix<f64>>> = (0..m)
        .map(|a| {
            let v = fd::partial(|p| christoffel(metric, p).map(|g| flatten(&g)).unwrap_or_default(), x, a, ORACLE_STEP);
            (0..m).map(|k| DMatrix::from_column_slice(m, m, &v[k * m * m..(k + 1) * m * m])).collect()
        })
        .collect();
    Ok(DMatrix::from_fn(m, m, |j, k| {
        let mut s = 0.0;
        for i in 0..m {
            // R^i_{ijk} = ∂_i Γ^i_jk − ∂_j Γ^i_ik + Γ^i_ip Γ^p_jk − Γ^i_jp Γ^p_ik
            s += dgam[i][i][(j, k)] - dgam[j][i][(i, k)];
            for p in 0..m {
                s += gam[i][(i, p)] * gam[p][(j, k)] - gam[i][(j, p)] * gam[p][(i, k)];
            }
        }
        s
    }))
}

/// Covariant Hessian `∂_ij h − Γ^k_ij ∂_k h` with all partials of `h` differenced.
pub fn fd_hessian(metric: &AmbientMetric, h: &ScalarField, x: &[f64]) -> Result<DMatrix<f64>> {
    let m = metric.dim();
    let gam = christoffel(metric, x)?;
    let val = |p: &[f64]| h.value(p).unwrap_or(f64::NAN);
    let grad: Vec<f64> = (0..m).map(|k| fd::partial(|p| vec![val(p)], x, k, ORACLE_STEP)[0]).collect();
    let second: Vec<Vec<f64>> = (0..m)
        .map(|a| fd::partial(|p| (0..m).map(|k| fd::partial(|q| vec![val(q)], p, k, 1e-3)[0]).collect(), x, a, 1e-3))
        .collect();
    Ok(DMatrix::from_fn(m, m, |i, j| {
        0.5 * (second[i][j] + second[j][i]) - (0..m).map(|k| gam[k][(i, j)] * grad[k]).sum::<f64>()
    }))
}

/// Components of `g^{jl} ∇_j R_kl − ½ ∂_k R`, with `∇Ric` differenced from the
/// closed-form Ricci tensor.
pub fn bianchi_defect(metric: &AmbientMetric, x: &[f64]) -> Result<Vec<f64>> {
    let m = metric.dim();
    let gam = christoffel(metric, x)?;
    let ric = ricci(metric, x)?.data;
    let f = metric.factor_at(x)?;
    let ginv = f * f;
    let d_ric: Vec<DMatrix<f64>> = (0..m)
        .map(|a| {
            let v = fd::partial(|p| ricci(metric, p).map(|r| r.data.iter().copied().collect()).unwrap_or_default(), x, a, ORACLE_STEP);
            DMatrix::from_column_slice(m, m, &v)
        })
        .collect();
    let scal = |p: &[f64]| -> Vec<f64> {
        let r = ricci(metric, p).map(|r| r.data.trace()).unwrap_or(f64::NAN);
        let fp = metric.factor_at(p).unwrap_or(f64::NAN);
        vec![fp * fp * r]
    };
    Ok((0..m)
        .map(|k| {
            let mut div = 0.0;
            for j in 0..m {
                let l = j;
                let mut cov = d_ric[j][(k, l)];
                for p in 0..m {
                    cov -= gam[p][(j, k)] * ric[(p, l)] + gam[p][(j, l)] * ric[(k, p)];
                }
                div += ginv * cov;
            }
            div - 0.5 * fd::partial(scal, x, k, ORACLE_STEP)[0]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_oracles_vanish() {
        let g = AmbientMetric::euclidean(3);
        let x = [0.1, 0.2, 0.3];
        assert!(fd_ricci(&g, &x).unwrap().abs().max() < 1e-12);
        assert!(bianchi_defect(&g, &x).unwrap().iter().all(|v| v.abs() < 1e-12));
    }
}
