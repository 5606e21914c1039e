//! Composite quadrature rules on sampled data.

/// Composite Simpson on a uniform grid; falls back to a Simpson-3/8 panel at
/// the end when the number of intervals is odd.
pub fn simpson_uniform(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (y[0] + y[1]),
        3 => h / 3.0 * (y[0] + 4.0 * y[1] + y[2]),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals.is_multiple_of(2) { (n - 1, 0.0) } else {
                let k = n - 4;
                (k, 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]))
            };
            if even_end == 0 {
                return tail;
            }
            let mut s = y[0] + y[even_end];
            for (i, v) in y.iter().enumerate().take(even_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0 + tail
        }
    }
}

/// Weights `w` with `Σ w_i y_i = simpson_uniform(y, h)`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            simpson_uniform(&e, h)
        })
        .collect()
}

/// Trapezoid rule over a closed periodic sample (spectrally accurate for
/// smooth periodic integrands).
pub fn periodic_trapezoid(y: &[f64], h: f64) -> f64 {
    y.iter().sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_on_cubics() {
        for n in [5usize, 6, 9, 10] {
            let h = 2.0 / (n - 1) as f64;
            let y: Vec<f64> = (0..n).map(|i| {
                let x = i as f64 * h;
                x * x * x - x + 1.0
            }).collect();
            assert!((simpson_uniform(&y, h) - 4.0).abs() < 1e-13, "n={n}");
            let w = simpson_weights(n, h);
            let dot: f64 = w.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert!((dot - simpson_uniform(&y, h)).abs() < 1e-14);
        }
    }
}
