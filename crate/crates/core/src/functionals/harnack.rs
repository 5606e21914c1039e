//! Hamilton's differential Harnack expression `𝒵(V) = ∂_tH + 2⟨V, ∇̂H⟩ + 𝒜(V, V)`
//! along a hypersurface family, and its extension by ambient curvature and map terms.

use super::frame::frame_terms;
use crate::conformal_geometry::{ricci, scalar_curvature};
use crate::error::{GeoError, Result};
use crate::mcf::{curve_geometry, interior_range, label_derivatives, sphere_geometry, soliton_residual, Hypersurface, SolitonFamily};
use crate::numerics::fd::ORACLE_STEP;
use crate::rh_flow::{Background, BackgroundSlice};
use std::fmt::Write as _;
use std::ops::Range;

/// Residual of `H + e₀f` above which a family is not accepted as a soliton seed.
pub const HYPOTHESIS_TOL: f64 = 1e-4;

/// Choice of `V` in `𝒵(V)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarnackField {
    Zero,
    /// `V = −∇̂f̄`, the translating-soliton choice.
    AgainstPotentialGradient,
    /// `V = +∇̂f̄`, a sign-flipped control.
    AlongPotentialGradient,
}

impl HarnackField {
    fn scale(self) -> f64 {
        match self {
            HarnackField::Zero => 0.0,
            HarnackField::AgainstPotentialGradient => -1.0,
            HarnackField::AlongPotentialGradient => 1.0,
        }
    }
}

/// Per-point terms of the (extended) Harnack expression at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnackReport {
    pub time: f64,
    pub field: HarnackField,
    /// `∂H/∂t` at fixed label.
    pub mean_curvature_rate: Vec<f64>,
    /// `⟨V, ∇̂H⟩`.
    pub gradient_pairing: Vec<f64>,
    /// `𝒜(V, V)`.
    pub second_form: Vec<f64>,
    /// `2R^{0î}∇̂_î f̄`.
    pub ricci_mixed: Vec<f64>,
    /// `−½∇₀R̄`.
    pub scalar_slope: Vec<f64>,
    /// `−H R̄₀₀`.
    pub ricci_normal: Vec<f64>,
    /// `α𝒜(∇̂φ̄, ∇̂φ̄)`.
    pub map_term: Vec<f64>,
    pub total: Vec<f64>,
    /// Points entering the norms.
    pub interior: Range<usize>,
    pub sup: f64,
    /// Root mean square over the interior points.
    pub rms: f64,
}

impl HarnackReport {
    fn assemble(time: f64, field: HarnackField, terms: [Vec<f64>; 7], interior: Range<usize>) -> Self {
        let [rate, pairing, second, mixed, slope, normal, map] = terms;
        let total: Vec<f64> = (0..rate.len())
            .map(|i| rate[i] + 2.0 * pairing[i] + second[i] + mixed[i] + slope[i] + normal[i] + map[i])
            .collect();
        let inner = &total[interior.clone()];
        let sup = inner.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let rms = (inner.iter().map(|v| v * v).sum::<f64>() / inner.len().max(1) as f64).sqrt();
        HarnackReport {
            time,
            field,
            mean_curvature_rate: rate,
            gradient_pairing: pairing,
            second_form: second,
            ricci_mixed: mixed,
            scalar_slope: slope,
            ricci_normal: normal,
            map_term: map,
            total,
            interior,
            sup,
            rms,
        }
    }

    /// Largest deviation of `total` from the sum of the stored terms.
    pub fn bookkeeping_defect(&self) -> f64 {
        (0..self.total.len())
            .map(|i| {
                let sum = self.mean_curvature_rate[i]
                    + 2.0 * self.gradient_pairing[i]
                    + self.second_form[i]
                    + self.ricci_mixed[i]
                    + self.scalar_slope[i]
                    + self.ricci_normal[i]
                    + self.map_term[i];
                (self.total[i] - sum).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "point,dH_dt,pairing,second_form,ricci_mixed,scalar_slope,ricci_normal,map_term,total\n",
        );
        for i in 0..self.total.len() {
            let _ = writeln!(
                out,
                "{i},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.mean_curvature_rate[i],
                self.gradient_pairing[i],
                self.second_form[i],
                self.ricci_mixed[i],
                self.scalar_slope[i],
                self.ricci_normal[i],
                self.map_term[i],
                self.total[i]
            );
        }
        out
    }
}

/// Time derivative at fixed label of a per-point `quantity` at snapshot `k`:
/// Richardson-extrapolated central differences when two neighbours exist on
/// each side, a plain central difference with one.
pub fn fixed_label_rate<B, Q>(family: &SolitonFamily, bg: &B, k: usize, quantity: Q) -> Result<Vec<f64>>
where
    B: Background + ?Sized,
    Q: Fn(&Hypersurface, &BackgroundSlice) -> Result<Vec<f64>>,
{
    let len = family.len();
    if k == 0 || k + 1 >= len {
        return Err(GeoError::Insufficient(format!("snapshot {k} of {len} has no neighbour on both sides")));
    }
    let reach = if k >= 2 && k + 2 < len { 2 } else { 1 };
    let dt = family.times[k + 1] - family.times[k];
    for j in k - reach..k + reach {
        let step = family.times[j + 1] - family.times[j];
        if (step - dt).abs() > 1e-9 * dt.abs() {
            return Err(GeoError::Precondition(format!("non-uniform time grid near t = {}", family.times[k])));
        }
    }
    let at = |j: usize| -> Result<Vec<f64>> { quantity(&family.surfaces[j], &bg.slice_at(family.times[j])?) };
    let (minus, plus) = (at(k - 1)?, at(k + 1)?);
    let near: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * dt)).collect();
    if reach == 1 {
        return Ok(near);
    }
    let (minus2, plus2) = (at(k - 2)?, at(k + 2)?);
    Ok(near
        .iter()
        .zip(plus2.iter().zip(&minus2))
        .map(|(d1, (p, m))| (4.0 * d1 - (p - m) / (4.0 * dt)) / 3.0)
        .collect())
}

/// `∂H/∂t` at fixed label for snapshot `k`.
pub fn mean_curvature_rate<B: Background + ?Sized>(family: &SolitonFamily, bg: &B, k: usize) -> Result<Vec<f64>> {
    fixed_label_rate(family, bg, k, |s, slice| s.mean_curvature(&slice.metric))
}

fn terms_at<B: Background + ?Sized>(
    family: &SolitonFamily,
    bg: &B,
    k: usize,
    field: HarnackField,
    extended: bool,
) -> Result<HarnackReport> {
    let t = family.times[k];
    let slice = bg.slice_at(t)?;
    let alpha = bg.alpha();
    let rate = mean_curvature_rate(family, bg, k)?;
    let scale = field.scale();
    match &family.surfaces[k] {
        Hypersurface::Sphere(s) => {
            // Radial data: every tangential gradient vanishes.
            let geo = sphere_geometry(s, &slice.metric)?;
            let pole = s.pole();
            let (mut slope, mut normal) = (0.0, 0.0);
            if extended {
                let mut out = pole.clone();
                let mut inn = pole.clone();
                out[0] += ORACLE_STEP;
                inn[0] -= ORACLE_STEP;
                let dr = (scalar_curvature(&slice.metric, &out)? - scalar_curvature(&slice.metric, &inn)?) / (2.0 * ORACLE_STEP);
                slope = 0.5 * geo.factor * dr;
                normal = -geo.mean_curvature * geo.factor * geo.factor * ricci(&slice.metric, &pole)?.data[(0, 0)];
            }
            let z = vec![0.0];
            Ok(HarnackReport::assemble(t, field, [rate, z.clone(), z.clone(), z.clone(), vec![slope], vec![normal], z], 0..1))
        }
        Hypersurface::Curve(c) => {
            let geo = curve_geometry(c, &slice.metric)?;
            let n = c.len();
            let (dh, _) = label_derivatives(&geo.mean_curvature, c.is_closed());
            let mut pairing = vec![0.0; n];
            let mut second = vec![0.0; n];
            let mut mixed = vec![0.0; n];
            let mut slope = vec![0.0; n];
            let mut normal = vec![0.0; n];
            let mut map = vec![0.0; n];
            let frame = if extended { Some(frame_terms(c.points(), &geo, &slice.metric, &slice.map, bg.target())?) } else { None };
            for (i, p) in c.points().iter().enumerate() {
                let grad = slice.potential.jet(p)?.grad;
                // Unit-speed derivatives along the curve in the metric g.
                let f_s = geo.factor[i] * (grad[0] * geo.tangent[i][0] + grad[1] * geo.tangent[i][1]);
                let h_s = geo.factor[i] * dh[i] / geo.speed[i];
                let v = scale * f_s;
                pairing[i] = v * h_s;
                second[i] = geo.mean_curvature[i] * v * v;
                if let Some(fr) = &frame {
                    mixed[i] = 2.0 * fr[i].ric_nt * f_s;
                    slope[i] = -0.5 * fr[i].normal_scalar_slope;
                    normal[i] = -geo.mean_curvature[i] * fr[i].ric_nn;
                    map[i] = alpha * geo.mean_curvature[i] * fr[i].map_tangent_sq;
                }
            }
            Ok(HarnackReport::assemble(t, field, [rate, pairing, second, mixed, slope, normal, map], interior_range(c)))
        }
    }
}

/// `𝒵(V)` at snapshot `k` without ambient corrections.
pub fn harnack_z<B: Background + ?Sized>(family: &SolitonFamily, bg: &B, k: usize, field: HarnackField) -> Result<HarnackReport> {
    terms_at(family, bg, k, field, false)
}

/// `𝒵(V) + 2R^{0î}∇̂_î f̄ − ½∇₀R̄ − H R̄₀₀ + α𝒜(∇̂φ̄, ∇̂φ̄)` at snapshot `k`.
///
/// The background must be a steady soliton and the first snapshot must satisfy
/// `H + e₀f̄ = 0` and `∇₀φ̄ = 0`.
pub fn extended_harnack<B: Background + ?Sized>(
    family: &SolitonFamily,
    bg: &B,
    k: usize,
    field: HarnackField,
) -> Result<HarnackReport> {
    if !bg.is_steady_soliton() {
        return Err(GeoError::Precondition("extended Harnack identity needs a steady soliton background".into()));
    }
    let first = family.surfaces.first().ok_or_else(|| GeoError::Insufficient("empty family".into()))?;
    let slice = bg.slice_at(family.times[0])?;
    let residual = soliton_residual(first, &slice.metric, &slice.potential)?.sup;
    if residual > HYPOTHESIS_TOL {
        return Err(GeoError::Precondition(format!("initial surface has |H + e₀f̄| = {residual:e}")));
    }
    if let Hypersurface::Curve(c) = first {
        if !slice.map.is_constant() {
            let geo = curve_geometry(c, &slice.metric)?;
            let fr = frame_terms(c.points(), &geo, &slice.metric, &slice.map, bg.target())?;
            let worst = fr[interior_range(c)].iter().fold(0.0_f64, |a, t| a.max(t.map_normal_sq));
            if worst > HYPOTHESIS_TOL * HYPOTHESIS_TOL {
                return Err(GeoError::Precondition(format!("initial surface has |∇₀φ̄|² = {worst:e}")));
            }
        }
    }
    terms_at(family, bg, k, field, true)
}
