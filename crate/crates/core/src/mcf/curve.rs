//! Discrete plane curves in a 2-D conformal ambient `g = F⁻²δ`.

use crate::conformal_geometry::{AmbientMetric, ScalarField};
use crate::error::{GeoError, Result};
use crate::numerics::spectral::periodic_label_derivatives;
use crate::numerics::{CubicSpline, Jet, PeriodicSpline};

/// Vertex polygon, counterclockwise when closed. Open arcs are oriented so that
/// the inward normal (tangent rotated by +90°) points to the concave side.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCurve {
    points: Vec<[f64; 2]>,
    closed: bool,
}

pub const MIN_VERTICES: usize = 16;

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn segments_cross(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let d1 = cross(sub(q, p), sub(r, p));
    let d2 = cross(sub(q, p), sub(s, p));
    let d3 = cross(sub(s, r), sub(p, r));
    let d4 = cross(sub(s, r), sub(q, r));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl PlaneCurve {
    pub fn new(points: Vec<[f64; 2]>, closed: bool) -> Result<Self> {
        if points.len() < MIN_VERTICES {
            return Err(GeoError::Insufficient(format!("curve needs at least {MIN_VERTICES} vertices")));
        }
        if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(GeoError::NonFinite { at: 0.0 });
        }
        let c = PlaneCurve { points, closed };
        if closed && c.signed_area() <= 0.0 {
            return Err(GeoError::Precondition("closed curves must be counterclockwise".into()));
        }
        c.check_simple()?;
        Ok(c)
    }

    pub fn circle(center: [f64; 2], radius: f64, n: usize) -> Result<Self> {
        Self::from_fn(n, true, |s| {
            let a = std::f64::consts::TAU * s;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
    }

    pub fn ellipse(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::from_fn(n, true, |s| {
            let t = std::f64::consts::TAU * s;
            [a * t.cos(), b * t.sin()]
        })
    }

    /// Closed curve `r(θ) = radius·(1 + amp·cos(mode θ))`.
    pub fn perturbed_circle(radius: f64, amp: f64, mode: u32, n: usize) -> Result<Self> {
        Self::from_fn(n, true, |s| {
            let t = std::f64::consts::TAU * s;
            let r = radius * (1.0 + amp * (mode as f64 * t).cos());
            [r * t.cos(), r * t.sin()]
        })
    }

    /// Grim Reaper `y = −log cos x` sampled uniformly in arclength on
    /// `s ∈ [−s_max, s_max]`, where it reads `(atan sinh s, log cosh s)`.
    pub fn grim_reaper(s_max: f64, n: usize) -> Result<Self> {
        Self::from_fn(n, false, |u| {
            let s = -s_max + 2.0 * s_max * u;
            [s.sinh().atan(), s.cosh().ln()]
        })
    }

    /// Samples `f` at `n` parameters in `[0, 1)` (closed) or `[0, 1]` (open).
    pub fn from_fn<F: Fn(f64) -> [f64; 2]>(n: usize, closed: bool, f: F) -> Result<Self> {
        let denom = if closed { n as f64 } else { (n - 1).max(1) as f64 };
        Self::new((0..n).map(|i| f(i as f64 / denom)).collect(), closed)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.len();
        0.5 * (0..n).map(|i| cross(self.points[i], self.points[(i + 1) % n])).sum::<f64>()
    }

    fn segment_count(&self) -> usize {
        if self.closed { self.len() } else { self.len() - 1 }
    }

    /// Euclidean chord lengths of consecutive vertices.
    pub fn spacings(&self) -> Vec<f64> {
        let n = self.len();
        (0..self.segment_count())
            .map(|i| {
                let d = sub(self.points[(i + 1) % n], self.points[i]);
                d[0].hypot(d[1])
            })
            .collect()
    }

    /// Whether every spacing is within `[mean/ratio, mean·ratio]`.
    pub fn spacing_within(&self, ratio: f64) -> bool {
        let sp = self.spacings();
        let mean = sp.iter().sum::<f64>() / sp.len() as f64;
        sp.iter().all(|s| *s >= mean / ratio && *s <= mean * ratio)
    }

    /// Sweep over segments sorted by their left end.
    pub fn check_simple(&self) -> Result<()> {
        let n = self.len();
        let m = self.segment_count();
        let seg = |i: usize| (self.points[i], self.points[(i + 1) % n]);
        let mut order: Vec<usize> = (0..m).collect();
        let xmin = |i: usize| seg(i).0[0].min(seg(i).1[0]);
        let xmax = |i: usize| seg(i).0[0].max(seg(i).1[0]);
        order.sort_by(|a, b| xmin(*a).total_cmp(&xmin(*b)));
        let mut active: Vec<usize> = Vec::new();
        for &i in &order {
            let lo = xmin(i);
            active.retain(|&j| xmax(j) >= lo);
            let (p, q) = seg(i);
            for &j in &active {
                let adjacent = i.abs_diff(j) <= 1 || (self.closed && i.abs_diff(j) == m - 1);
                if adjacent {
                    continue;
                }
                let (r, s) = seg(j);
                if segments_cross(p, q, r, s) {
                    return Err(GeoError::SelfIntersection { i: i.min(j), j: i.max(j) });
                }
            }
            active.push(i);
        }
        Ok(())
    }

    pub(crate) fn parametrization(&self) -> Result<CurveSpline> {
        let xs: Vec<f64> = self.points.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p[1]).collect();
        if self.closed {
            Ok(CurveSpline::Closed(PeriodicSpline::new(&xs)?, PeriodicSpline::new(&ys)?))
        } else {
            let s: Vec<f64> = (0..self.len()).map(|i| i as f64).collect();
            Ok(CurveSpline::Open(CubicSpline::not_a_knot(&s, &xs)?, CubicSpline::not_a_knot(&s, &ys)?))
        }
    }

    /// Moves vertices along the curve so that Euclidean arclength spacing is
    /// uniform. Points stay on the interpolating spline, so the motion is
    /// tangential to its order.
    pub fn redistribute(&self) -> Result<Self> {
        let sp = self.parametrization()?;
        let n = self.len();
        let segs = self.segment_count();
        // Three-point Gauss–Legendre arclength of every parameter interval.
        let gl = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];
        let piece = |a: f64, b: f64| -> f64 {
            gl.iter()
                .map(|(x, w)| {
                    let s = 0.5 * (a + b) + 0.5 * (b - a) * x;
                    let (_, d, _) = sp.eval(s);
                    w * d[0].hypot(d[1])
                })
                .sum::<f64>()
                * 0.5
                * (b - a)
        };
        let mut cum = vec![0.0; segs + 1];
        for i in 0..segs {
            cum[i + 1] = cum[i] + piece(i as f64, i as f64 + 1.0);
        }
        let total = cum[segs];
        let targets = if self.closed { n } else { n - 1 };
        let mut pts = Vec::with_capacity(n);
        let mut seg = 0;
        for k in 0..n {
            let target = total * k as f64 / targets as f64;
            if !self.closed && k == n - 1 {
                pts.push(self.points[n - 1]);
                break;
            }
            while seg + 1 < segs && cum[seg + 1] < target {
                seg += 1;
            }
            // Newton on the arclength inside interval `seg`, starting linearly.
            let len = cum[seg + 1] - cum[seg];
            let mut s = seg as f64 + if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
            for _ in 0..8 {
                let (_, d, _) = sp.eval(s);
                let speed = d[0].hypot(d[1]);
                let err = cum[seg] + piece(seg as f64, s) - target;
                s -= err / speed;
                s = s.clamp(seg as f64, seg as f64 + 1.0);
                if err.abs() < 1e-14 * total {
                    break;
                }
            }
            let (p, _, _) = sp.eval(s);
            pts.push(p);
        }
        Self::new(pts, self.closed)
    }

    /// Curve with every vertex replaced by `f(vertex)`.
    pub fn map_points<F: FnMut([f64; 2]) -> Result<[f64; 2]>>(&self, mut f: F) -> Result<Self> {
        let pts = self.points.iter().map(|p| f(*p)).collect::<Result<Vec<_>>>()?;
        Self::new(pts, self.closed)
    }
}

const CENTRAL_D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const CENTRAL_D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
// One-sided five-point stencils on nodes 0..4, evaluated at node 0 and node 1.
const EDGE_D1: [[f64; 5]; 2] = [
    [-25.0 / 12.0, 48.0 / 12.0, -36.0 / 12.0, 16.0 / 12.0, -3.0 / 12.0],
    [-3.0 / 12.0, -10.0 / 12.0, 18.0 / 12.0, -6.0 / 12.0, 1.0 / 12.0],
];
const EDGE_D2: [[f64; 5]; 2] = [
    [35.0 / 12.0, -104.0 / 12.0, 114.0 / 12.0, -56.0 / 12.0, 11.0 / 12.0],
    [11.0 / 12.0, -20.0 / 12.0, 6.0 / 12.0, 4.0 / 12.0, -1.0 / 12.0],
];

/// Nodes and weights of the five-point stencil at vertex `i`; `sign` flips the
/// first derivative of mirrored one-sided stencils.
fn stencil(n: usize, closed: bool, i: usize) -> ([usize; 5], &'static [f64; 5], &'static [f64; 5], f64) {
    if closed {
        ([(i + n - 2) % n, (i + n - 1) % n, i, (i + 1) % n, (i + 2) % n], &CENTRAL_D1, &CENTRAL_D2, 1.0)
    } else if i < 2 {
        ([0, 1, 2, 3, 4], &EDGE_D1[i], &EDGE_D2[i], 1.0)
    } else if i + 2 >= n {
        let k = n - 1 - i;
        ([n - 1, n - 2, n - 3, n - 4, n - 5], &EDGE_D1[k], &EDGE_D2[k], -1.0)
    } else {
        ([i - 2, i - 1, i, i + 1, i + 2], &CENTRAL_D1, &CENTRAL_D2, 1.0)
    }
}

/// Fourth-order first and second derivatives in the vertex label of per-vertex samples.
pub fn label_derivatives(values: &[f64], closed: bool) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    (0..n)
        .map(|i| {
            let (nodes, w1, w2, sign) = stencil(n, closed, i);
            nodes.iter().enumerate().fold((0.0, 0.0), |(a, b), (k, &j)| (a + sign * w1[k] * values[j], b + w2[k] * values[j]))
        })
        .unzip()
}

impl PlaneCurve {
    fn label_derivatives(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let (nodes, w1, w2, sign) = stencil(self.len(), self.closed, i);
        let mut d1 = [0.0; 2];
        let mut d2 = [0.0; 2];
        for (k, &j) in nodes.iter().enumerate() {
            for c in 0..2 {
                d1[c] += sign * w1[k] * self.points[j][c];
                d2[c] += w2[k] * self.points[j][c];
            }
        }
        (d1, d2)
    }
}

/// Cubic interpolation of a curve in its vertex-label parameter.
#[derive(Debug, Clone)]
pub(crate) enum CurveSpline {
    Closed(PeriodicSpline, PeriodicSpline),
    Open(CubicSpline, CubicSpline),
}

impl CurveSpline {
    /// Position, first and second parameter derivatives at label `s`.
    pub fn eval(&self, s: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let (a, b): (Jet, Jet) = match self {
            CurveSpline::Closed(x, y) => (x.eval(s), y.eval(s)),
            CurveSpline::Open(x, y) => (x.eval(s), y.eval(s)),
        };
        ([a.value, b.value], [a.d1, b.d1], [a.d2, b.d2])
    }
}

/// Extrinsic data at every vertex. Vectors are Euclidean coordinate components.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveGeometry {
    /// Euclidean unit tangent.
    pub tangent: Vec<[f64; 2]>,
    /// Euclidean unit inward normal.
    pub normal: Vec<[f64; 2]>,
    /// Conformal factor `F` at each vertex.
    pub factor: Vec<f64>,
    /// `|∂_σ x|` in the Euclidean metric.
    pub speed: Vec<f64>,
    /// Signed Euclidean curvature (positive on convex counterclockwise curves).
    pub euclidean_curvature: Vec<f64>,
    /// Geodesic curvature w.r.t. the inward normal; the single entry of 𝒜.
    pub mean_curvature: Vec<f64>,
    /// `ds_g/dσ = |∂_σ x| / F`.
    pub line_element: Vec<f64>,
}

impl CurveGeometry {
    /// Inward unit normal of the ambient metric, `e = F n`.
    pub fn unit_normal(&self, i: usize) -> [f64; 2] {
        [self.factor[i] * self.normal[i][0], self.factor[i] * self.normal[i][1]]
    }

    /// Unit tangent of the ambient metric, `F t`.
    pub fn unit_tangent(&self, i: usize) -> [f64; 2] {
        [self.factor[i] * self.tangent[i][0], self.factor[i] * self.tangent[i][1]]
    }
}

/// Label derivatives are spectral on closed curves and fourth-order stencils on
/// open arcs; `H = F k + ⟨∇F, n⟩` then follows pointwise.
pub fn curve_geometry(curve: &PlaneCurve, metric: &AmbientMetric) -> Result<CurveGeometry> {
    if metric.dim() != 2 {
        return Err(GeoError::Dimension { expected: 2, got: metric.dim() });
    }
    curve.check_simple()?;
    let n = curve.len();
    let spectral = curve.closed.then(|| periodic_label_derivatives(&curve.points));
    let mut g = CurveGeometry {
        tangent: Vec::with_capacity(n),
        normal: Vec::with_capacity(n),
        factor: Vec::with_capacity(n),
        speed: Vec::with_capacity(n),
        euclidean_curvature: Vec::with_capacity(n),
        mean_curvature: Vec::with_capacity(n),
        line_element: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (d1, d2) = match &spectral {
            Some((a, b)) => (a[i], b[i]),
            None => curve.label_derivatives(i),
        };
        let p = curve.points[i];
        let speed = d1[0].hypot(d1[1]);
        let t = [d1[0] / speed, d1[1] / speed];
        let nrm = [-t[1], t[0]];
        let k = cross(d1, d2) / (speed * speed * speed);
        let fj = metric.factor_jet(&p)?;
        let h = fj.value * k + fj.grad[0] * nrm[0] + fj.grad[1] * nrm[1];
        g.tangent.push(t);
        g.normal.push(nrm);
        g.factor.push(fj.value);
        g.speed.push(speed);
        g.euclidean_curvature.push(k);
        g.mean_curvature.push(h);
        g.line_element.push(speed / fj.value);
    }
    Ok(g)
}

/// `H + e f̄` at every vertex.
pub fn curve_soliton_residual(curve: &PlaneCurve, metric: &AmbientMetric, potential: &ScalarField) -> Result<Vec<f64>> {
    let geo = curve_geometry(curve, metric)?;
    curve
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let j = potential.jet(p)?;
            let e = geo.unit_normal(i);
            Ok(geo.mean_curvature[i] + j.grad[0] * e[0] + j.grad[1] * e[1])
        })
        .collect()
}

/// Symmetric Hausdorff distance between the polygonal images of two curves.
pub fn hausdorff(a: &PlaneCurve, b: &PlaneCurve) -> f64 {
    fn one_sided(a: &PlaneCurve, b: &PlaneCurve) -> f64 {
        let bp = b.points();
        let n = bp.len();
        let segs = if b.is_closed() { n } else { n - 1 };
        a.points()
            .iter()
            .map(|p| {
                (0..segs)
                    .map(|i| {
                        let (q, r) = (bp[i], bp[(i + 1) % n]);
                        let d = sub(r, q);
                        let len2 = d[0] * d[0] + d[1] * d[1];
                        let t = if len2 > 0.0 { ((p[0] - q[0]) * d[0] + (p[1] - q[1]) * d[1]) / len2 } else { 0.0 };
                        let t = t.clamp(0.0, 1.0);
                        (p[0] - q[0] - t * d[0]).hypot(p[1] - q[1] - t * d[1])
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
    one_sided(a, b).max(one_sided(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal_geometry::RadialProfile;

    #[test]
    fn unit_circle_has_unit_curvature() {
        let c = PlaneCurve::circle([0.0, 0.0], 1.0, 64).unwrap();
        let g = curve_geometry(&c, &AmbientMetric::euclidean(2)).unwrap();
        assert!(g.mean_curvature.iter().all(|h| (h - 1.0).abs() < 1e-3));
    }

    #[test]
    fn cigar_circle_matches_sphere_formula() {
        let c = PlaneCurve::circle([0.0, 0.0], 1.0, 256).unwrap();
        let g = curve_geometry(&c, &AmbientMetric::new(2, RadialProfile::Cigar).unwrap()).unwrap();
        assert!(g.mean_curvature.iter().all(|h| (h - 0.5_f64.sqrt()).abs() < 1e-5));
    }

    #[test]
    fn ellipse_curvature() {
        let (a, b) = (2.0, 1.0);
        let c = PlaneCurve::ellipse(a, b, 512).unwrap();
        let g = curve_geometry(&c, &AmbientMetric::euclidean(2)).unwrap();
        let worst = c
            .points()
            .iter()
            .zip(&g.mean_curvature)
            .map(|(p, h)| {
                // κ = ab / (b²x²/a² + a²y²/b²)^{3/2} at (x, y) = (a cos t, b sin t)
                let (ct, st) = (p[0] / a, p[1] / b);
                let exact = a * b / (a * a * st * st + b * b * ct * ct).powf(1.5);
                (h - exact).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn clockwise_and_crossing_curves_rejected() {
        let mut pts: Vec<[f64; 2]> = PlaneCurve::circle([0.0, 0.0], 1.0, 32).unwrap().points().to_vec();
        pts.reverse();
        assert!(PlaneCurve::new(pts, true).is_err());
        // Limaçon arc through its inner loop.
        let looped = PlaneCurve::from_fn(64, false, |s| {
            let t = 0.1 + (std::f64::consts::TAU - 0.2) * s;
            let r = 0.5 + t.cos();
            [r * t.cos(), r * t.sin()]
        });
        assert!(matches!(looped, Err(GeoError::SelfIntersection { .. })));
    }

    #[test]
    fn redistribution_equalizes_spacing() {
        let c = PlaneCurve::ellipse(3.0, 1.0, 128).unwrap();
        assert!(!c.spacing_within(1.5));
        let r = c.redistribute().unwrap();
        // Chords of equal arcs differ by about κ²h²/24.
        assert!(r.spacing_within(1.01));
        assert!(hausdorff(&c, &r) < 1e-2);
    }
}
