//! Soliton families obtained by pushing an f-minimal hypersurface through the
//! generating flow, and their reparametrization to normal motion.

use super::curve::{hausdorff, CurveSpline, PlaneCurve};
use super::sphere::SphereSurface;
use super::{soliton_residual_at, Ambient, Hypersurface, McfStepper, Redistribution};
use crate::conformal_geometry::norm;
use crate::error::{GeoError, Result};
use crate::rh_flow::{Motion, SelfSimilarBackground};
use crate::soliton_ode::SolitonClass;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// `Σ_t = ψ_t⁻¹(Σ₀)`.
    Pushforward,
    /// Relabeled so that vertices move normally.
    Reparametrized,
    /// Snapshots of an MCF run.
    Evolved,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Pushforward => "pushforward",
            Construction::Reparametrized => "reparametrized",
            Construction::Evolved => "evolved",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolitonFamily {
    pub times: Vec<f64>,
    pub surfaces: Vec<Hypersurface>,
    pub construction: Construction,
    pub class: SolitonClass,
    /// Residual of the seed surface; members are expected within ten times this.
    pub seed_tolerance: f64,
}

impl SolitonFamily {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `sup_t sup_p |H + e f̄|` against `bg`.
    pub fn residual_sup(&self, bg: &SelfSimilarBackground) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (t, s) in self.times.iter().zip(&self.surfaces) {
            worst = worst.max(soliton_residual_at(s, bg, *t)?.sup);
        }
        Ok(worst)
    }

    /// Largest tangential vertex speed between consecutive snapshots, using
    /// the Euclidean tangent at the later time.
    pub fn tangential_speed(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 1..self.len() {
            let (Some(a), Some(b)) = (self.surfaces[k - 1].as_curve(), self.surfaces[k].as_curve()) else {
                return Ok(0.0);
            };
            let dt = self.times[k] - self.times[k - 1];
            let sp = b.parametrization()?;
            for i in super::interior_range(b) {
                let (_, d1, _) = sp.eval(i as f64);
                let len = d1[0].hypot(d1[1]);
                let v = [b.points()[i][0] - a.points()[i][0], b.points()[i][1] - a.points()[i][1]];
                worst = worst.max((v[0] * d1[0] + v[1] * d1[1]).abs() / (len * dt));
            }
        }
        Ok(worst)
    }
}

/// Maps `seed` (f-minimal at the identity time of `bg`) to `ψ_t⁻¹(seed)` for
/// every `t` in `times`.
pub fn construct_soliton_family(
    seed: &Hypersurface,
    bg: &SelfSimilarBackground,
    times: &[f64],
    tolerance: f64,
) -> Result<SolitonFamily> {
    let t_id = bg.params().identity_time();
    let seed_res = soliton_residual_at(seed, bg, t_id)?.sup;
    if seed_res > tolerance {
        return Err(GeoError::Precondition(format!("seed residual {seed_res:e} exceeds {tolerance:e}")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GeoError::Precondition("family times must increase".into()));
    }
    for t in times {
        bg.params().check_time(*t)?;
    }
    let surfaces = times
        .iter()
        .map(|&t| -> Result<Hypersurface> {
            match seed {
                Hypersurface::Sphere(s) => {
                    if !matches!(bg.motion(), Motion::Identity | Motion::Dilation { .. }) {
                        return Err(GeoError::Precondition("coordinate spheres need a radial generating flow".into()));
                    }
                    let p = bg.diffeo_flow_inverse(&s.pole(), t)?;
                    Ok(SphereSurface::new(norm(&p), s.dim())?.into())
                }
                Hypersurface::Curve(c) => {
                    let moved = c.map_points(|p| {
                        let q = bg.diffeo_flow_inverse(&p, t)?;
                        Ok([q[0], q[1]])
                    })?;
                    Ok(moved.into())
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolitonFamily {
        times: times.to_vec(),
        surfaces,
        construction: Construction::Pushforward,
        class: bg.params().class,
        seed_tolerance: tolerance.max(seed_res),
    })
}

/// Runs MCF from `t0` with fixed step `dt`, keeping every `stride`-th state.
/// Vertices are never redistributed, so labels follow the normal flow.
#[allow(clippy::too_many_arguments)]
pub fn evolve_family<A: Ambient + ?Sized>(
    seed: &Hypersurface,
    ambient: &A,
    class: SolitonClass,
    t0: f64,
    dt: f64,
    stride: usize,
    snapshots: usize,
) -> Result<SolitonFamily> {
    let stepper = McfStepper { redistribution: Redistribution::Never, ..McfStepper::default() };
    let mut cur = seed.clone();
    let mut times = vec![t0];
    let mut surfaces = vec![cur.clone()];
    let mut t = t0;
    for k in 1..snapshots {
        for j in 0..stride {
            let step = (k - 1) * stride + j;
            cur = stepper.step(&cur, &ambient.metric_at(t)?, dt)?;
            t = t0 + (step + 1) as f64 * dt;
        }
        times.push(t);
        surfaces.push(cur.clone());
    }
    Ok(SolitonFamily { times, surfaces, construction: Construction::Evolved, class, seed_tolerance: f64::INFINITY })
}

/// Largest label displacement per step before the velocity estimate is refused.
const MAX_LABEL_STEP: f64 = 0.5;

/// Removes the tangential part of the vertex motion by integrating the label
/// ODE `σ̇ = −⟨V, ∂_σC⟩ / |∂_σC|²` with a predictor-corrector step, where `V`
/// is the time difference of the input at fixed label.
pub fn reparametrize_to_mcf(family: &SolitonFamily) -> Result<SolitonFamily> {
    if family.len() < 2 {
        return Err(GeoError::Insufficient("reparametrization needs at least two times".into()));
    }
    if family.surfaces[0].as_sphere().is_some() {
        return Ok(SolitonFamily { construction: Construction::Reparametrized, ..family.clone() });
    }
    let curves: Vec<&PlaneCurve> = family
        .surfaces
        .iter()
        .map(|s| s.as_curve().ok_or_else(|| GeoError::Precondition("mixed family".into())))
        .collect::<Result<_>>()?;
    let splines: Vec<CurveSpline> = curves.iter().map(|c| c.parametrization()).collect::<Result<_>>()?;
    let n = curves[0].len();
    let closed = curves[0].is_closed();
    let top = (n - 1) as f64;
    let clamp = |s: f64| if closed { s } else { s.clamp(0.0, top) };

    let mut labels: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mut out = vec![family.surfaces[0].clone()];
    for k in 0..family.len() - 1 {
        let dt = family.times[k + 1] - family.times[k];
        let (a, b) = (&splines[k], &splines[k + 1]);
        // Label rate at time level `at` (0 for k, 1 for k+1) and label s.
        let rate = |s: f64, later: bool| -> f64 {
            let (pa, _, _) = a.eval(s);
            let (pb, _, _) = b.eval(s);
            let v = [(pb[0] - pa[0]) / dt, (pb[1] - pa[1]) / dt];
            let (_, d1, _) = if later { b.eval(s) } else { a.eval(s) };
            -(v[0] * d1[0] + v[1] * d1[1]) / (d1[0] * d1[0] + d1[1] * d1[1])
        };
        let mut next = Vec::with_capacity(n);
        for (i, s) in labels.iter().enumerate() {
            let free_end = !closed && (i == 0 || i == n - 1);
            if free_end {
                next.push(*s);
                continue;
            }
            let r0 = rate(*s, false);
            let pred = clamp(s + dt * r0);
            let r1 = rate(pred, true);
            let step = 0.5 * dt * (r0 + r1);
            if step.abs() > MAX_LABEL_STEP {
                return Err(GeoError::Insufficient(format!(
                    "label moved {step:.3} vertices in one step at t = {}; refine the time grid",
                    family.times[k]
                )));
            }
            next.push(clamp(s + step));
        }
        labels = next;
        let pts: Vec<[f64; 2]> = labels.iter().map(|s| b.eval(*s).0).collect();
        out.push(PlaneCurve::new(pts, closed)?.into());
    }
    Ok(SolitonFamily {
        times: family.times.clone(),
        surfaces: out,
        construction: Construction::Reparametrized,
        class: family.class,
        seed_tolerance: family.seed_tolerance,
    })
}

/// Hausdorff distance between the image curves of two families, per time.
pub fn family_hausdorff(a: &SolitonFamily, b: &SolitonFamily) -> Result<Vec<f64>> {
    if a.times != b.times {
        return Err(GeoError::Precondition("families on different time grids".into()));
    }
    a.surfaces
        .iter()
        .zip(&b.surfaces)
        .map(|(x, y)| match (x, y) {
            (Hypersurface::Curve(p), Hypersurface::Curve(q)) => Ok(hausdorff(p, q)),
            (Hypersurface::Sphere(p), Hypersurface::Sphere(q)) => Ok((p.radius() - q.radius()).abs()),
            _ => Err(GeoError::Precondition("mixed family".into())),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::curve_soliton_residual;

    #[test]
    fn gaussian_sphere_family() {
        let bg = SelfSimilarBackground::gaussian(3, 1.0).unwrap();
        let seed: Hypersurface = SphereSurface::new(2.0, 3).unwrap().into();
        let times = [0.0, 0.25, 0.5, 0.75, 0.9];
        let fam = construct_soliton_family(&seed, &bg, &times, 1e-12).unwrap();
        for (t, s) in fam.times.iter().zip(&fam.surfaces) {
            let r = s.as_sphere().unwrap().radius();
            assert!((r - (4.0 * (1.0 - t)).sqrt()).abs() < 1e-6, "t = {t}: {r}");
        }
        assert!(fam.residual_sup(&bg).unwrap() < 1e-6);
        let same = reparametrize_to_mcf(&fam).unwrap();
        assert_eq!(same.surfaces, fam.surfaces);
    }

    #[test]
    fn grim_reaper_translates_up() {
        let bg = SelfSimilarBackground::linear(vec![0.0, -1.0]).unwrap();
        let arc = PlaneCurve::grim_reaper(4.0, 257).unwrap();
        let res = curve_soliton_residual(&arc, bg.metric(), bg.potential()).unwrap();
        assert!(res[128].abs() < 1e-6);
        let seed: Hypersurface = arc.into();
        let fam = construct_soliton_family(&seed, &bg, &[0.0, 0.5, 1.0], 1e-3).unwrap();
        let apex = fam.surfaces[2].as_curve().unwrap().points()[128];
        assert!(apex[0].abs() < 1e-12 && (apex[1] - 1.0).abs() < 1e-9, "{apex:?}");
    }

    #[test]
    fn artificial_spin_is_removed() {
        let n = 64;
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 1e-3).collect();
        let omega = 2.0;
        let surfaces = times
            .iter()
            .map(|t| {
                let r = (1.0 - 2.0 * t).sqrt();
                PlaneCurve::from_fn(n, true, |s| {
                    let a = std::f64::consts::TAU * s + omega * t;
                    [r * a.cos(), r * a.sin()]
                })
                .unwrap()
                .into()
            })
            .collect();
        let fam = SolitonFamily {
            times,
            surfaces,
            construction: Construction::Pushforward,
            class: SolitonClass::Steady,
            seed_tolerance: 0.0,
        };
        assert!(fam.tangential_speed().unwrap() > 1.0);
        let out = reparametrize_to_mcf(&fam).unwrap();
        let first = out.surfaces[0].as_curve().unwrap().points();
        let last = out.surfaces.last().unwrap().as_curve().unwrap().points();
        let worst = first
            .iter()
            .zip(last)
            .map(|(p, q)| {
                let d = q[1].atan2(q[0]) - p[1].atan2(p[0]);
                (d + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI
            })
            .fold(0.0_f64, |a, d| a.max(d.abs()));
        assert!(worst < 1e-4, "{worst}");
        // Output vertices sit on the interpolant between input vertices, a sagitta
        // (about h²κ/8) away from the input polygon.
        let h = std::f64::consts::TAU / n as f64;
        assert!(family_hausdorff(&fam, &out).unwrap().iter().all(|d| *d < h * h / 4.0));
    }
}
