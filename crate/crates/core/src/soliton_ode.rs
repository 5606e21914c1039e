//! Radial gradient solitons: the reduced ODE system for `(f(r), φ(r))`, its
//! integration, and the full tensorial residual used to cross-check it.

use crate::conformal_geometry::{
    grad_laplacian_from_jets, hessian_from_jets, norm, pullback_from_jet, ricci, tension_from_jets, AmbientMetric,
    MapField, RadialProfile, ScalarField, SymTensor, TargetMetric, TensorKind, TAYLOR_RADIUS,
};
use crate::error::{GeoError, Result};
use crate::numerics::{Jet, Rk45};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolitonClass {
    Steady,
    Shrinking,
    Expanding,
}

impl std::str::FromStr for SolitonClass {
    type Err = GeoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steady" => Ok(SolitonClass::Steady),
            "shrinking" => Ok(SolitonClass::Shrinking),
            "expanding" => Ok(SolitonClass::Expanding),
            other => Err(GeoError::Precondition(format!("unknown soliton class '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub alpha: f64,
    pub lambda: f64,
    pub class: SolitonClass,
    pub horizon: f64,
}

impl SolitonParams {
    /// λ is tied to the class at the reference slice where ψ is the identity.
    pub fn new(class: SolitonClass, alpha: f64, horizon: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(GeoError::Precondition(format!("coupling must be non-negative, got {alpha}")));
        }
        let lambda = match class {
            SolitonClass::Steady => 0.0,
            SolitonClass::Shrinking => 0.5,
            SolitonClass::Expanding => -0.5,
        };
        Ok(SolitonParams { alpha, lambda, class, horizon })
    }

    pub fn steady(alpha: f64) -> Self {
        SolitonParams { alpha, lambda: 0.0, class: SolitonClass::Steady, horizon: 0.0 }
    }

    /// κ ∈ {1, −1, 0}; 0 encodes the steady case σ ≡ 1.
    pub fn kappa(&self) -> i32 {
        match self.class {
            SolitonClass::Steady => 0,
            SolitonClass::Shrinking => 1,
            SolitonClass::Expanding => -1,
        }
    }

    /// Scale factor σ(t) of the self-similar metric.
    pub fn sigma(&self, t: f64) -> f64 {
        match self.class {
            SolitonClass::Steady => 1.0,
            _ => self.kappa() as f64 * (self.horizon - t),
        }
    }

    /// Time at which the diffeomorphism flow is the identity.
    pub fn identity_time(&self) -> f64 {
        self.horizon - self.kappa() as f64
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if self.sigma(t) > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(GeoError::Domain(format!("t = {t} outside the {:?} interval (T = {})", self.class, self.horizon)))
        }
    }
}

/// Residuals of the radial system at one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialResidual {
    /// Trace equation (coefficient of δ_ij).
    pub e1: f64,
    /// Map equation, one entry per target component.
    pub e2: Vec<f64>,
    /// Coefficient of `x_i x_j` in the metric equation.
    pub bracket: f64,
}

impl RadialResidual {
    pub fn system_norm(&self) -> f64 {
        self.e2.iter().fold(self.e1.abs(), |a, v| a.max(v.abs()))
    }
}

struct Frame {
    f: f64,
    fp_f: f64,
    fpp_f: f64,
    g: f64,
    grad_log_g: Vec<f64>,
}

fn frame(factor: &RadialProfile, target: &RadialProfile, phi: &[f64], r: f64) -> Result<Frame> {
    if !(r > 0.0) {
        return Err(GeoError::Domain(format!("radial residual needs r > 0, got {r}")));
    }
    let fj = factor.eval_positive(r)?;
    let rho = norm(phi);
    if !target.is_constant() && rho < TAYLOR_RADIUS {
        return Err(GeoError::Singular(format!("map reaches the target origin at r = {r}")));
    }
    let gj = target
        .eval_positive(rho)
        .map_err(|_| GeoError::Singular(format!("target factor vanishes at ρ = {rho}")))?;
    let grad_log_g = if target.is_constant() {
        vec![0.0; phi.len()]
    } else {
        phi.iter().map(|y| gj.d1 * y / (rho * gj.value)).collect()
    };
    Ok(Frame { f: fj.value, fp_f: fj.d1 / fj.value, fpp_f: fj.d2 / fj.value, g: gj.value, grad_log_g })
}

fn map_quadratic(fr: &Frame, phip: &[f64]) -> Vec<f64> {
    let sq: f64 = phip.iter().map(|v| v * v).sum();
    let dot: f64 = phip.iter().zip(&fr.grad_log_g).map(|(a, b)| a * b).sum();
    (0..phip.len()).map(|th| sq * fr.grad_log_g[th] - 2.0 * phip[th] * dot).collect()
}

/// Residual of the radial soliton system at radius `r`; `phi` holds one jet per
/// target component.
pub fn radial_residual(
    factor: &RadialProfile,
    target: &RadialProfile,
    f: Jet,
    phi: &[Jet],
    params: &SolitonParams,
    m: usize,
    r: f64,
) -> Result<RadialResidual> {
    let val: Vec<f64> = phi.iter().map(|j| j.value).collect();
    let fr = frame(factor, target, &val, r)?;
    let md = m as f64;
    let phip: Vec<f64> = phi.iter().map(|j| j.d1).collect();
    let e1 = (2.0 * md - 3.0) * fr.fp_f / r + f.d1 / r + fr.fpp_f - (md - 1.0) * fr.fp_f * fr.fp_f
        - fr.fp_f * f.d1
        - params.lambda / (fr.f * fr.f);
    let drift = (md - 1.0) / r - (md - 2.0) * fr.fp_f - f.d1;
    let quad = map_quadratic(&fr, &phip);
    let e2 = phi.iter().zip(&quad).map(|(j, q)| j.d2 + drift * j.d1 + q).collect();
    let phip_sq: f64 = phip.iter().map(|v| v * v).sum();
    let r2 = r * r;
    let bracket = (md - 2.0) * (fr.fpp_f / r2 - fr.fp_f / (r2 * r)) + f.d2 / r2 - f.d1 / (r2 * r)
        + 2.0 * fr.fp_f * f.d1 / r2
        - params.alpha * phip_sq / (fr.g * fr.g * r2);
    Ok(RadialResidual { e1, e2, bracket })
}

/// Second derivatives `(f'', φ'')` that make the bracket and map equations hold.
fn closure(
    factor: &RadialProfile,
    target: &RadialProfile,
    params: &SolitonParams,
    m: usize,
    r: f64,
    fp: f64,
    phi: &[f64],
    phip: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let fr = frame(factor, target, phi, r)?;
    let md = m as f64;
    let phip_sq: f64 = phip.iter().map(|v| v * v).sum();
    let fpp = fp / r - 2.0 * fr.fp_f * fp - (md - 2.0) * (fr.fpp_f - fr.fp_f / r) + params.alpha * phip_sq / (fr.g * fr.g);
    let drift = (md - 1.0) / r - (md - 2.0) * fr.fp_f - fp;
    let quad = map_quadratic(&fr, phip);
    let phipp = phip.iter().zip(&quad).map(|(d, q)| -drift * d - q).collect();
    Ok((fpp, phipp))
}

/// Initial data for [`integrate_soliton`].
#[derive(Debug, Clone, PartialEq)]
pub enum SolitonInit {
    /// Values at `r₀` supplied directly.
    Explicit { f: f64, fp: f64, phi: Vec<f64>, phip: Vec<f64> },
    /// Even expansion at the origin: `f'(0) = 0`, `φ'(0) = 0`, and `f'(r₀)` from
    /// the trace equation at `r₀`.
    RegularAtOrigin { f0: f64, phi0: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonSolution {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    pub phip: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
    pub residual_sup: f64,
    pub bracket_sup: f64,
}

/// Slope `f'(r)` making the trace equation vanish at `r`.
pub fn trace_equation_slope(factor: &RadialProfile, lambda: f64, m: usize, r: f64) -> Result<f64> {
    let fj = factor.eval_positive(r)?;
    let md = m as f64;
    let a = fj.d1 / fj.value;
    let denom = 1.0 / r - a;
    if denom.abs() < 1e-12 {
        return Err(GeoError::Singular(format!("trace equation degenerate at r = {r}")));
    }
    let rest = (2.0 * md - 3.0) * a / r + fj.d2 / fj.value - (md - 1.0) * a * a - lambda / (fj.value * fj.value);
    Ok(-rest / denom)
}

#[allow(clippy::too_many_arguments)]
pub fn integrate_soliton(
    factor: &RadialProfile,
    target: &RadialProfile,
    params: &SolitonParams,
    m: usize,
    r0: f64,
    r1: f64,
    init: &SolitonInit,
    steps: usize,
    solver: &Rk45,
) -> Result<SolitonSolution> {
    if !(r0 > 0.0 && r1 > r0) {
        return Err(GeoError::Precondition(format!("need 0 < r0 < r1, got [{r0}, {r1}]")));
    }
    if steps < 1 {
        return Err(GeoError::Precondition("need at least one output step".into()));
    }
    let (f, fp, phi, phip) = match init {
        SolitonInit::Explicit { f, fp, phi, phip } => (*f, *fp, phi.clone(), phip.clone()),
        SolitonInit::RegularAtOrigin { f0, phi0 } => {
            let fp = trace_equation_slope(factor, params.lambda, m, r0)?;
            (f0 + 0.5 * r0 * fp, fp, phi0.clone(), vec![0.0; phi0.len()])
        }
    };
    let n = phi.len();
    if phip.len() != n {
        return Err(GeoError::Dimension { expected: n, got: phip.len() });
    }
    let mut y0 = vec![f, fp];
    y0.extend(&phi);
    y0.extend(&phip);
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(GeoError::NonFinite { at: r0 });
    }
    let grid: Vec<f64> = (0..=steps).map(|i| r0 + (r1 - r0) * i as f64 / steps as f64).collect();
    let rhs = |r: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (fpp, phipp) = closure(factor, target, params, m, r, y[1], &y[2..2 + n], &y[2 + n..])?;
        dy[0] = y[1];
        dy[1] = fpp;
        dy[2..2 + n].copy_from_slice(&y[2 + n..]);
        dy[2 + n..].copy_from_slice(&phipp);
        Ok(())
    };
    let (states, _) = solver.solve(rhs, r0, &y0, &grid)?;
    let mut sol = SolitonSolution {
        r: grid,
        f: states.iter().map(|s| s[0]).collect(),
        fp: states.iter().map(|s| s[1]).collect(),
        phi: states.iter().map(|s| s[2..2 + n].to_vec()).collect(),
        phip: states.iter().map(|s| s[2 + n..].to_vec()).collect(),
        residual: Vec::new(),
        residual_sup: 0.0,
        bracket_sup: 0.0,
    };
    let (res, sup, bsup) = sol.certify(factor, target, params, m)?;
    sol.residual = res;
    sol.residual_sup = sup;
    sol.bracket_sup = bsup;
    Ok(sol)
}

impl SolitonSolution {
    pub fn target_dim(&self) -> usize {
        self.phi.first().map_or(0, Vec::len)
    }

    /// Recomputes the per-node residual from the stored grids alone.
    pub fn certify(
        &self,
        factor: &RadialProfile,
        target: &RadialProfile,
        params: &SolitonParams,
        m: usize,
    ) -> Result<(Vec<f64>, f64, f64)> {
        let mut res = Vec::with_capacity(self.r.len());
        let mut bsup: f64 = 0.0;
        for i in 0..self.r.len() {
            let r = self.r[i];
            let (fpp, phipp) = closure(factor, target, params, m, r, self.fp[i], &self.phi[i], &self.phip[i])?;
            let phi: Vec<Jet> = (0..self.target_dim()).map(|a| Jet::new(self.phi[i][a], self.phip[i][a], phipp[a])).collect();
            let rr = radial_residual(factor, target, Jet::new(self.f[i], self.fp[i], fpp), &phi, params, m, r)?;
            bsup = bsup.max(rr.bracket.abs());
            res.push(rr.system_norm());
        }
        let sup = res.iter().fold(0.0, |a: f64, v| a.max(*v));
        Ok((res, sup, bsup))
    }

    pub fn to_columnar(&self) -> String {
        let n = self.target_dim();
        let mut s = String::from("# r f fp");
        for a in 0..n {
            let _ = write!(s, " phi{a}");
        }
        for a in 0..n {
            let _ = write!(s, " phip{a}");
        }
        s.push_str(" residual\n");
        for i in 0..self.r.len() {
            let _ = write!(s, "{:.17e} {:.17e} {:.17e}", self.r[i], self.f[i], self.fp[i]);
            for a in 0..n {
                let _ = write!(s, " {:.17e}", self.phi[i][a]);
            }
            for a in 0..n {
                let _ = write!(s, " {:.17e}", self.phip[i][a]);
            }
            let _ = writeln!(s, " {:.17e}", self.residual[i]);
        }
        s
    }

    pub fn from_columnar(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(GeoError::Config { line: 1, msg: "empty soliton file".into() })?;
        let cols: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
        let n = cols.iter().filter(|c| c.starts_with("phi") && !c.starts_with("phip")).count();
        if cols.len() != 4 + 2 * n {
            return Err(GeoError::Config { line: 1, msg: format!("unexpected header '{header}'") });
        }
        let mut sol = SolitonSolution {
            r: vec![],
            f: vec![],
            fp: vec![],
            phi: vec![],
            phip: vec![],
            residual: vec![],
            residual_sup: 0.0,
            bracket_sup: 0.0,
        };
        for (ln, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| GeoError::Config { line: ln + 1, msg: e.to_string() })?;
            if v.len() != cols.len() {
                return Err(GeoError::Config { line: ln + 1, msg: format!("expected {} columns", cols.len()) });
            }
            sol.r.push(v[0]);
            sol.f.push(v[1]);
            sol.fp.push(v[2]);
            sol.phi.push(v[3..3 + n].to_vec());
            sol.phip.push(v[3 + n..3 + 2 * n].to_vec());
            sol.residual.push(v[3 + 2 * n]);
        }
        sol.residual_sup = sol.residual.iter().fold(0.0, |a: f64, v| a.max(*v));
        Ok(sol)
    }
}

/// Full tensorial residuals `E₁ = Ric + ∇²f − α∇φ⊗∇φ − λg` and
/// `E₂ = τφ − ⟨∇φ, ∇f⟩` at a point.
pub fn cartesian_residual(
    g: &AmbientMetric,
    gamma: &TargetMetric,
    f: &ScalarField,
    phi: &MapField,
    params: &SolitonParams,
    x: &[f64],
) -> Result<(SymTensor, Vec<f64>)> {
    let fj = g.factor_jet(x)?;
    let hj = f.jet(x)?;
    let pj = phi.jet(x)?;
    let ric = ricci(g, x)?.data;
    let hess = hessian_from_jets(&fj, &hj);
    let pull = pullback_from_jet(&pj, gamma)?;
    let metric = g.tensor(x)?;
    let e1 = ric + hess - pull * params.alpha - metric * params.lambda;
    let tau = tension_from_jets(&fj, &pj, gamma)?;
    let gl = grad_laplacian_from_jets(&fj, &hj);
    let m = x.len();
    let e2 = (0..pj.value.len())
        .map(|th| tau[th] - (0..m).map(|k| gl.grad[k] * pj.jac[(th, k)]).sum::<f64>())
        .collect();
    Ok((SymTensor::new(TensorKind::SolitonResidual, e1), e2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_f() -> RadialProfile {
        RadialProfile::Quadratic { c0: 0.0, c2: 0.25 }
    }

    #[test]
    fn trivial_data_has_zero_residual() {
        let p = SolitonParams::steady(0.0);
        let rr = radial_residual(
            &RadialProfile::Constant(1.0),
            &RadialProfile::Constant(1.0),
            Jet::default(),
            &[Jet::new(1.0, 0.0, 0.0)],
            &p,
            3,
            0.7,
        )
        .unwrap();
        assert_eq!(rr.system_norm(), 0.0);
        assert_eq!(rr.bracket, 0.0);
    }

    #[test]
    fn gaussian_and_cigar_substitution() {
        let shrink = SolitonParams::new(SolitonClass::Shrinking, 0.0, 1.0).unwrap();
        let steady = SolitonParams::steady(0.0);
        for r in [0.05, 1.0, 3.7] {
            let g = gaussian_f().eval(r);
            let rr = radial_residual(&RadialProfile::Constant(1.0), &RadialProfile::Constant(1.0), g, &[], &shrink, 3, r).unwrap();
            assert!(rr.e1.abs() < 1e-15 && rr.bracket.abs() < 1e-15);
            let c = RadialProfile::LogOnePlusSquare { scale: -1.0 }.eval(r);
            let rr = radial_residual(&RadialProfile::Cigar, &RadialProfile::Constant(1.0), c, &[], &steady, 2, r).unwrap();
            assert!(rr.e1.abs() < 1e-13 && rr.bracket.abs() * r.powi(3) < 1e-14, "{rr:?}");
        }
    }

    #[test]
    fn rejects_bad_radius() {
        let p = SolitonParams::steady(0.0);
        let c = RadialProfile::Constant(1.0);
        assert!(radial_residual(&c, &c, Jet::default(), &[], &p, 3, 0.0).is_err());
    }

    #[test]
    fn map_reaching_target_origin_is_rejected() {
        let p = SolitonParams::steady(0.0);
        let one = RadialProfile::Constant(1.0);
        let r = radial_residual(&one, &RadialProfile::Cigar, Jet::default(), &[Jet::new(0.0, 1.0, 0.0)], &p, 3, 1.0);
        assert!(matches!(r, Err(GeoError::Singular(_))));
    }

    #[test]
    fn harmonic_radial_map_decays_as_inverse_square() {
        let p = SolitonParams::steady(0.0);
        let one = RadialProfile::Constant(1.0);
        let init = SolitonInit::Explicit { f: 0.0, fp: 0.0, phi: vec![0.0], phip: vec![1.0] };
        let sol = integrate_soliton(&one, &one, &p, 3, 1.0, 2.0, &init, 10, &Rk45::default()).unwrap();
        let last = sol.phip.last().unwrap()[0];
        assert!((last - 0.25).abs() < 1e-10);
    }

    #[test]
    fn columnar_round_trip() {
        let p = SolitonParams::new(SolitonClass::Shrinking, 0.0, 1.0).unwrap();
        let one = RadialProfile::Constant(1.0);
        let init = SolitonInit::RegularAtOrigin { f0: 0.0, phi0: vec![0.5] };
        let sol = integrate_soliton(&one, &one, &p, 3, 0.01, 1.0, &init, 8, &Rk45::default()).unwrap();
        let back = SolitonSolution::from_columnar(&sol.to_columnar()).unwrap();
        assert_eq!(back.r, sol.r);
        assert_eq!(back.phi, sol.phi);
        assert_eq!(back.residual_sup, sol.residual_sup);
    }

    #[test]
    fn cartesian_gaussian_vanishes() {
        let p = SolitonParams::new(SolitonClass::Shrinking, 0.0, 1.0).unwrap();
        let (e1, e2) = cartesian_residual(
            &AmbientMetric::euclidean(3),
            &TargetMetric::euclidean(1),
            &ScalarField::Radial(gaussian_f()),
            &MapField::Constant(vec![0.3]),
            &p,
            &[1.0, 1.0, 0.0],
        )
        .unwrap();
        assert!(e1.max_abs() < 1e-14 && e2[0] == 0.0);
    }
}
