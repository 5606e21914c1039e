use super::config::{ConfigError, ScenarioConfig, ScenarioKind, SurfaceShape};
use super::profiles::{lookup, BuiltBackground, Profile};
use super::{Artifact, CliError, RunOutcome};
use crate::conformal_geometry::{AmbientMetric, MapField, RadialProfile, TargetMetric};
use crate::error::GeoError;
use crate::functionals::{
    extended_harnack, variation_delta_f, HarnackField, TorusPerturbation, WeightedAreaSeries,
};
use crate::mcf::{
    construct_soliton_family, curve_geometry, evolve_family, reparametrize_to_mcf, sphere_geometry, Ambient,
    Hypersurface, McfStepper, PlaneCurve, SolitonFamily, SphereSurface,
};
use crate::numerics::Rk45;
use crate::rh_flow::{BoundaryRule, DomainMotion};
use crate::soliton_ode::{integrate_soliton, SolitonClass, SolitonInit, SolitonParams};
use crate::suite;
use crate::verify::{check_monotonicity, check_thm1, check_translating_soliton_eqs, FdReport, Gate, Resolution, Thm1Scenario};
use std::fmt::Write as _;
use std::sync::Arc;

type Outcome = Result<RunOutcome, CliError>;

fn invalid(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::Invalid { field: field.to_string(), msg: msg.into() })
}

pub(super) fn run(cfg: &ScenarioConfig) -> Outcome {
    let kind = cfg.kind;
    let pipeline = |source: GeoError| CliError::Pipeline { scenario: kind, source };
    match kind {
        ScenarioKind::SolitonSolve => soliton_solve(cfg, pipeline),
        ScenarioKind::BackgroundBuild => background_build(cfg, pipeline),
        ScenarioKind::McfRun => surface_flow(cfg, false, pipeline),
        ScenarioKind::Monotonicity => surface_flow(cfg, true, pipeline),
        ScenarioKind::Harnack => harnack(cfg, pipeline),
        ScenarioKind::Variation => variation(cfg, pipeline),
        ScenarioKind::Thm1 => thm1(cfg, pipeline),
        ScenarioKind::FullSuite => Ok(full_suite()),
    }
}

fn profile(cfg: &ScenarioConfig) -> Result<&'static Profile, CliError> {
    lookup(&cfg.background.profile)
        .ok_or_else(|| invalid("background.profile", format!("unknown profile '{}'", cfg.background.profile)))
}

fn background(cfg: &ScenarioConfig) -> Result<BuiltBackground, CliError> {
    profile(cfg)?.build(&cfg.background).map_err(|e| invalid("background.profile", e.to_string()))
}

fn surface(cfg: &ScenarioConfig, dim: usize) -> Result<Hypersurface, CliError> {
    let n = cfg.surface.points;
    let curve = |c: crate::error::Result<PlaneCurve>| -> Result<Hypersurface, CliError> {
        if dim != 2 {
            return Err(invalid("surface.shape", format!("curves need a planar background, got dim = {dim}")));
        }
        c.map(Hypersurface::from).map_err(|e| invalid("surface.shape", e.to_string()))
    };
    match &cfg.surface.shape {
        SurfaceShape::Sphere { radius } => {
            SphereSurface::new(*radius, dim).map(Hypersurface::from).map_err(|e| invalid("surface.radius", e.to_string()))
        }
        SurfaceShape::Circle { radius } => curve(PlaneCurve::circle([0.0, 0.0], *radius, n)),
        SurfaceShape::PerturbedCircle { radius, amplitude, mode } => curve(PlaneCurve::perturbed_circle(*radius, *amplitude, *mode, n)),
        SurfaceShape::Ellipse { radius, aspect } => curve(PlaneCurve::ellipse(radius * aspect, *radius, n)),
        SurfaceShape::GrimReaper { half_length } => curve(PlaneCurve::grim_reaper(*half_length, n)),
    }
}

/// Refuses a time step above the explicit stability limit of the initial surface.
fn check_cfl(seed: &Hypersurface, bg: &BuiltBackground, t: f64, dt: f64) -> Result<(), CliError> {
    let metric = bg.metric_at(t).map_err(|e| invalid("background.profile", e.to_string()))?;
    let limit = McfStepper::default().max_step(seed, &metric).map_err(|e| invalid("surface.shape", e.to_string()))?;
    if dt > limit {
        return Err(CliError::Refused(GeoError::Cfl { dt, limit }));
    }
    Ok(())
}

fn soliton_solve(cfg: &ScenarioConfig, pipeline: impl Fn(GeoError) -> CliError) -> Outcome {
    let spec = &cfg.background;
    let radial = profile(cfg)?.radial_soliton(spec).map_err(|e| invalid("background.profile", e.to_string()))?;
    let params = match radial.class {
        SolitonClass::Steady => SolitonParams::steady(spec.alpha),
        c => SolitonParams::new(c, spec.alpha, spec.horizon).map_err(|e| invalid("background.alpha", e.to_string()))?,
    };
    if radial.factor.is_constant() || spec.dim == 2 {
    } else {
        return Err(invalid("background.dim", "this profile is two-dimensional"));
    }
    let n = &cfg.numerics;
    let init = SolitonInit::RegularAtOrigin { f0: radial.potential.value(0.0), phi0: vec![0.0] };
    let one = RadialProfile::Constant(1.0);
    let sol = integrate_soliton(&radial.factor, &one, &params, spec.dim, n.r_start, n.r_end, &init, n.steps, &Rk45::default())
        .map_err(&pipeline)?;
    let res = Resolution::default().n(sol.r.len());
    let mut out = RunOutcome::default();
    out.reports.push(FdReport::scalar("soliton_residual_sup", sol.residual_sup, 0.0, n.tol, Gate::Absolute, res.clone()));
    // f is fixed only up to a constant, so its slope is compared.
    let slope: Vec<f64> = sol.r.iter().map(|r| radial.potential.eval(*r).d1).collect();
    out.reports.push(FdReport::vector("slope_vs_closed_form", sol.fp.clone(), slope.clone(), n.tol, Gate::Absolute, res));
    let mut csv = String::from("r,f,fp,fp_closed_form,residual\n");
    for i in 0..sol.r.len() {
        let _ = writeln!(csv, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", sol.r[i], sol.f[i], sol.fp[i], slope[i], sol.residual[i]);
    }
    out.artifacts.push(Artifact::data("soliton.tsv", sol.to_columnar()));
    out.artifacts.push(Artifact::plotted("soliton.csv", csv, "r", &["f", "fp", "residual"]));
    Ok(out)
}

fn times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| t0 + (t1 - t0) * k as f64 / (count - 1) as f64).collect()
}

fn background_build(cfg: &ScenarioConfig, pipeline: impl Fn(GeoError) -> CliError) -> Outcome {
    let built = background(cfg)?;
    let bg = built
        .self_similar()
        .ok_or_else(|| invalid("background.profile", format!("{} is static; nothing to build", cfg.background.profile)))?;
    let n = &cfg.numerics;
    let m = bg.dim();
    let mut out = RunOutcome::default();
    let mut csv = String::from("t,sigma,x1,factor,potential\n");
    let probes: Vec<Vec<f64>> = [0.25, 0.5, 1.0]
        .iter()
        .map(|s| {
            let mut x = vec![0.0; m];
            x[0] = s * n.r_end;
            x
        })
        .collect();
    for t in times(n.t_start, n.t_end, n.snapshots) {
        let slice = bg.slice(t).map_err(&pipeline)?;
        for i in 0..=n.steps {
            let mut x = vec![0.0; m];
            x[0] = n.r_end * i as f64 / n.steps as f64;
            let factor = slice.metric.factor_at(&x).map_err(&pipeline)?;
            let f = slice.potential.value(&x).map_err(&pipeline)?;
            let _ = writeln!(csv, "{t:.17e},{:.17e},{:.17e},{factor:.17e},{f:.17e}", slice.sigma, x[0]);
        }
        let (mut closed, mut traced) = (Vec::new(), Vec::new());
        for x in &probes {
            closed.push(slice.potential.value(x).map_err(&pipeline)?);
            traced.push(bg.potential_by_tracing(t, x).map_err(&pipeline)?);
        }
        let res = Resolution::default().n(probes.len());
        out.reports.push(FdReport::vector(&format!("potential_tracing_t{t}"), closed, traced, n.tol, Gate::Relative, res));
        let inside = bg.params().check_time(t - n.dt).is_ok() && bg.params().check_time(t + n.dt).is_ok();
        if inside {
            let mut r = bg.check_potential_evolution(t, &probes[1], n.dt).map_err(&pipeline)?;
            r.name = format!("potential_evolution_t{t}");
            out.reports.push(r);
        }
    }
    out.artifacts.push(Artifact::data("background.csv", csv));
    Ok(out)
}

fn surfaces_csv(family: &SolitonFamily, bg: &BuiltBackground) -> crate::error::Result<String> {
    let mut csv = String::new();
    for (k, (t, s)) in family.times.iter().zip(&family.surfaces).enumerate() {
        let metric = bg.metric_at(*t)?;
        match s {
            Hypersurface::Sphere(sp) => {
                if k == 0 {
                    csv.push_str("snapshot,t,radius,H\n");
                }
                let g = sphere_geometry(sp, &metric)?;
                let _ = writeln!(csv, "{k},{t:.17e},{:.17e},{:.17e}", sp.radius(), g.mean_curvature);
            }
            Hypersurface::Curve(c) => {
                if k == 0 {
                    csv.push_str("snapshot,t,vertex,x,y,H\n");
                }
                let g = curve_geometry(c, &metric)?;
                for (i, p) in c.points().iter().enumerate() {
                    let _ = writeln!(csv, "{k},{t:.17e},{i},{:.17e},{:.17e},{:.17e}", p[0], p[1], g.mean_curvature[i]);
                }
            }
        }
    }
    Ok(csv)
}

/// `mcf-run` records the flow and checks the monotonicity identity when the
/// background is a soliton; `monotonicity` requires one and adds the strict checks.
fn surface_flow(cfg: &ScenarioConfig, strict: bool, pipeline: impl Fn(GeoError) -> CliError) -> Outcome {
    let bg = background(cfg)?;
    if strict && bg.self_similar().is_none() {
        return Err(invalid("background.profile", "monotonicity needs a soliton background"));
    }
    let seed = surface(cfg, bg.dim())?;
    let n = &cfg.numerics;
    check_cfl(&seed, &bg, n.t_start, n.dt)?;
    let class = bg.class().unwrap_or(SolitonClass::Steady);
    let horizon = bg.self_similar().map_or(cfg.background.horizon, |b| b.params().horizon);
    let family = evolve_family(&seed, &bg, class, n.t_start, n.dt, n.stride, n.snapshots).map_err(&pipeline)?;
    let mut series = WeightedAreaSeries::new(class, bg.dim(), horizon);
    for (t, s) in family.times.iter().zip(&family.surfaces) {
        series.record(*t, s, &bg).map_err(&pipeline)?;
    }
    let mut out = RunOutcome::default();
    out.artifacts.push(Artifact::plotted("phi_series.csv", series.to_csv(), "t", &["phi", "area_f", "residual_integral"]));
    out.artifacts.push(Artifact::data("surfaces.csv", surfaces_csv(&family, &bg).map_err(&pipeline)?));
    if bg.self_similar().is_some() {
        let report = check_monotonicity(&series, 0.0, n.tol).map_err(&pipeline)?;
        let mut rates = String::from("t,dphi_dt_fd,dphi_dt_predicted\n");
        for (t, fd, pred) in &report.rates {
            let _ = writeln!(rates, "{t:.17e},{fd:.17e},{pred:.17e}");
        }
        out.artifacts.push(Artifact::plotted("phi_rates.csv", rates, "t", &["dphi_dt_fd", "dphi_dt_predicted"]));
        out.condition("phi_non_increasing", report.non_increasing, format!("max dΦ/dt = {:.6e}", report.max_rate));
        out.condition("constancy_consistent", report.constancy_consistent, "Φ constant exactly when the residual integral vanishes".into());
        if strict {
            let decreasing = series.phi.windows(2).all(|w| w[1] < w[0]);
            out.condition("phi_strictly_decreasing", decreasing, format!("{} samples", series.len()));
        }
        out.reports.push(report.identity);
    }
    Ok(out)
}

fn harnack(cfg: &ScenarioConfig, pipeline: impl Fn(GeoError) -> CliError) -> Outcome {
    let built = background(cfg)?;
    let bg = built
        .self_similar()
        .filter(|b| b.params().class == SolitonClass::Steady)
        .ok_or_else(|| invalid("background.profile", "the Harnack identity needs a steady soliton background"))?;
    let seed = surface(cfg, bg.dim())?;
    let Hypersurface::Curve(curve) = &seed else {
        return Err(invalid("surface.shape", "the Harnack scenario needs a curve"));
    };
    let n = &cfg.numerics;
    if n.snapshots < 5 {
        return Err(invalid("numerics.snapshots", "need at least 5 snapshots for the time derivative"));
    }
    let h = curve.spacings().into_iter().fold(f64::INFINITY, f64::min);
    if n.dt > 0.5 * h {
        return Err(CliError::Refused(GeoError::Precondition(format!(
            "relabeling needs Δt ≤ h/2; got Δt = {:e}, h = {h:e}",
            n.dt
        ))));
    }
    let times: Vec<f64> = (0..n.snapshots).map(|k| n.t_start + k as f64 * n.dt).collect();
    let pushed = construct_soliton_family(&seed, bg, &times, 1e-4).map_err(&pipeline)?;
    let family = reparametrize_to_mcf(&pushed).map_err(&pipeline)?;
    let k = n.snapshots / 2;
    let z = extended_harnack(&family, bg, k, HarnackField::AgainstPotentialGradient).map_err(&pipeline)?;
    let flipped = extended_harnack(&family, bg, k, HarnackField::AlongPotentialGradient).map_err(&pipeline)?;
    let mut out = RunOutcome::default();
    let inner = z.total[z.interior.clone()].to_vec();
    let len = inner.len();
    out.reports.push(FdReport::vector("harnack", inner, vec![0.0; len], n.tol, Gate::Absolute, Resolution::default().n(curve.len()).dt(n.dt)));
    let c = family.surfaces[k].as_curve().ok_or_else(|| invalid("surface.shape", "curve family expected"))?;
    out.reports.extend(check_translating_soliton_eqs(c, bg, family.times[k], n.tol).map_err(&pipeline)?);
    out.condition("flipped_control", flipped.sup > 0.1, format!("sup with V = +∇f = {:.3e}", flipped.sup));
    out.artifacts.push(Artifact::plotted("harnack.csv", z.to_csv(), "point", &["total", "dH_dt", "pairing"]));
    out.artifacts.push(Artifact::plotted("harnack_flipped.csv", flipped.to_csv(), "point", &["total"]));
    Ok(out)
}

fn variation(cfg: &ScenarioConfig, pipeline: impl Fn(GeoError) -> CliError) -> Outcome {
    if cfg.background.profile != "euclidean" {
        return Err(invalid("background.profile", "the variation scenario runs on the flat torus chart (profile euclidean)"));
    }
    let n = &cfg.numerics;
    if n.grid % 2 != 0 {
        return Err(invalid("numerics.grid", "must be even"));
    }
    let state = suite::curved_torus(n.grid).map_err(&pipeline)?;
    let target = TargetMetric::euclidean(1);
    let mut out = RunOutcome::default();
    let mut csv = String::from("seed,alpha,eps,lhs,rhs,rel_err,richardson_gap\n");
    for seed in cfg.seed..cfg.seed + n.samples as u64 {
        let pert = TorusPerturbation::random(&state.grid, 1, seed);
        let v = variation_delta_f(&state, cfg.background.alpha, &target, &pert, n.eps).map_err(&pipeline)?;
        let r = v.report(&format!("variation_seed{seed}"), n.tol, Gate::Relative);
        let _ = writeln!(csv, "{seed},{},{:e},{:.17e},{:.17e},{:.6e},{:.6e}", cfg.background.alpha, v.eps, v.lhs, v.rhs, r.rel_err, v.richardson_gap);
        out.reports.push(r);
    }
    out.artifacts.push(Artifact::plotted("variation.csv", csv, "seed", &["lhs", "rhs"]));
    Ok(out)
}

fn thm1(cfg: &ScenarioConfig, pipeline: impl Fn(GeoError) -> CliError) -> Outcome {
    let n = &cfg.numerics;
    let (scenario, gate) = match cfg.background.profile.as_str() {
        "euclidean" => {
            let m = cfg.background.dim;
            let r0 = match cfg.surface.shape {
                SurfaceShape::Circle { radius } | SurfaceShape::Sphere { radius } => radius,
                _ => return Err(invalid("surface.shape", "the disk scenario takes a circle or sphere radius")),
            };
            // Squared radius of the shrinking boundary at t_end sets the width of the terminal Gaussian.
            let width = r0 * r0 - 2.0 * (m as f64 - 1.0) * (n.t_end - n.t_start);
            if !(width > 0.0) {
                return Err(invalid("numerics.t_end", format!("the boundary sphere vanishes before t_end (R² = {width})")));
            }
            let metric = AmbientMetric::euclidean(m);
            let scenario = Thm1Scenario {
                metric: metric.clone(),
                map: MapField::Constant(vec![0.0]),
                target: TargetMetric::euclidean(1),
                alpha: cfg.background.alpha,
                domain: DomainMotion::euclidean_shrinking(m, r0, n.t_start),
                inner: BoundaryRule::Regular,
                outer: BoundaryRule::robin_from_metric(&metric, true),
                terminal: Arc::new(move |r| (-r * r / (2.0 * width)).exp()),
                t_start: n.t_start,
                t_end: n.t_end,
                nodes: n.nodes,
                steps: n.steps,
                check_time: 0.5 * (n.t_start + n.t_end),
                offset_steps: 4,
            };
            (scenario, Gate::Relative)
        }
        "flat_cylinder" => {
            let base = suite::cylinder_scenario().map_err(&pipeline)?;
            let scenario = Thm1Scenario {
                alpha: cfg.background.alpha,
                t_start: n.t_start,
                t_end: n.t_end,
                nodes: n.nodes,
                steps: n.steps,
                check_time: 0.5 * (n.t_start + n.t_end),
                offset_steps: 2,
                ..base
            };
            (scenario, Gate::Absolute)
        }
        other => {
            return Err(invalid("background.profile", format!("thm1 runs on euclidean or flat_cylinder, got {other}")));
        }
    };
    let o = check_thm1(&scenario, n.tol, gate).map_err(&pipeline)?;
    let mut out = RunOutcome::default();
    let mut terms = String::from("node,soliton_defect,map_defect\n");
    for (i, (s, m)) in o.rhs.soliton_defect.iter().zip(&o.rhs.map_defect).enumerate() {
        let _ = writeln!(terms, "{i},{s:.17e},{m:.17e}");
    }
    let mut totals = String::from("quantity,value\n");
    for (name, v) in [
        ("functional_before", o.functional_before),
        ("functional_after", o.functional_after),
        ("derivative_fd", o.report.lhs[0]),
        ("bulk", o.rhs.bulk),
        ("boundary", o.rhs.boundary),
        ("right_side", o.rhs.total),
    ] {
        let _ = writeln!(totals, "{name},{v:.17e}");
    }
    out.artifacts.push(Artifact::plotted("thm1_bulk.csv", terms, "node", &["soliton_defect", "map_defect"]));
    out.artifacts.push(Artifact::data("thm1_totals.csv", totals));
    out.reports.push(o.report);
    Ok(out)
}

/// Every acceptance check, one thread per check.
fn full_suite() -> RunOutcome {
    let outcomes = std::thread::scope(|scope| {
        let handles: Vec<_> = suite::CHECKS.iter().map(|c| scope.spawn(c)).collect();
        handles.into_iter().map(|h| h.join().expect("acceptance check panicked")).collect::<Vec<_>>()
    });
    let mut out = RunOutcome::default();
    let mut csv = String::from("criterion,title,pass,failures\n");
    for c in &outcomes {
        let _ = writeln!(csv, "{},\"{}\",{},\"{}\"", c.id, c.title, c.pass(), c.failures().join("; "));
        for r in &c.reports {
            out.reports.push(FdReport { name: format!("c{:02}/{}", c.id, r.name), ..r.clone() });
        }
        for cond in &c.conditions {
            out.condition(&format!("c{:02}/{}", c.id, cond.name), cond.pass, cond.detail.clone());
        }
        if let Some(e) = &c.error {
            out.condition(&format!("c{:02}/pipeline", c.id), false, e.clone());
        }
    }
    out.artifacts.push(Artifact::data("suite.csv", csv));
    out
}
