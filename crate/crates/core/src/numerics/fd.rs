//! Central fourth-order finite-difference stencils.

/// Default oracle spacing.
pub const ORACLE_STEP: f64 = 1e-4;

pub fn d1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

pub fn d2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
}

/// Partial derivative along axis `k` of a vector-valued function of a point.
pub fn partial<F>(f: F, x: &[f64], k: usize, h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut p = x.to_vec();
    let mut eval = |s: f64| {
        p[k] = x[k] + s;
        f(&p)
    };
    let a = eval(-2.0 * h);
    let b = eval(-h);
    let c = eval(h);
    let d = eval(2.0 * h);
    (0..a.len()).map(|i| (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_fourth_order() {
        let e1 = |h: f64| (d1(f64::sin, 0.7, h) - 0.7f64.cos()).abs();
        let e2 = |h: f64| (d2(f64::exp, 0.3, h) - 0.3f64.exp()).abs();
        assert!(e1(0.1) / e1(0.05) > 14.0);
        assert!(e2(0.1) / e2(0.05) > 14.0);
    }
}
