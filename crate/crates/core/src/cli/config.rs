//! Scenario files: `key = value` lines with dotted keys, `#` comments and
//! optional `[section]` headers that prefix the keys below them.

use crate::soliton_ode::SolitonClass;
use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: field `{field}`: {msg}")]
    Field { line: usize, field: String, msg: String },
    #[error("field `{field}`: {msg}")]
    Invalid { field: String, msg: String },
}

fn invalid(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    SolitonSolve,
    BackgroundBuild,
    McfRun,
    Monotonicity,
    Harnack,
    Variation,
    Thm1,
    FullSuite,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::SolitonSolve,
        ScenarioKind::BackgroundBuild,
        ScenarioKind::McfRun,
        ScenarioKind::Monotonicity,
        ScenarioKind::Harnack,
        ScenarioKind::Variation,
        ScenarioKind::Thm1,
        ScenarioKind::FullSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SolitonSolve => "soliton-solve",
            ScenarioKind::BackgroundBuild => "background-build",
            ScenarioKind::McfRun => "mcf-run",
            ScenarioKind::Monotonicity => "monotonicity",
            ScenarioKind::Harnack => "harnack",
            ScenarioKind::Variation => "variation",
            ScenarioKind::Thm1 => "thm1",
            ScenarioKind::FullSuite => "full-suite",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scenario kind '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundSpec {
    pub profile: String,
    pub dim: usize,
    pub alpha: f64,
    /// Requested class; must agree with the profile when given.
    pub class: Option<SolitonClass>,
    pub horizon: f64,
    /// Coefficient `c` in `f = −c·x_m` for `linear_f`.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceShape {
    Sphere { radius: f64 },
    Circle { radius: f64 },
    PerturbedCircle { radius: f64, amplitude: f64, mode: u32 },
    Ellipse { radius: f64, aspect: f64 },
    GrimReaper { half_length: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    pub shape: SurfaceShape,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub stride: usize,
    pub snapshots: usize,
    pub tol: f64,
    pub eps: f64,
    pub r_start: f64,
    pub r_end: f64,
    pub steps: usize,
    pub nodes: usize,
    pub grid: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub background: BackgroundSpec,
    pub surface: SurfaceSpec,
    pub numerics: Numerics,
    /// Relative to the output root.
    pub output_dir: PathBuf,
    /// Every key as written, for the run metadata.
    pub entries: BTreeMap<String, String>,
}

struct Entry {
    line: usize,
    value: String,
    used: Cell<bool>,
}

struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line, msg: format!("unterminated section header '{body}'") })?
                    .trim();
                if !valid_key(name) {
                    return Err(ConfigError::Syntax { line, msg: format!("bad section name '{name}'") });
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, msg: format!("expected `key = value`, found '{body}'") })?;
            let key = key.trim();
            if !valid_key(key) {
                return Err(ConfigError::Syntax { line, msg: format!("bad key '{key}'") });
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            let value = value.trim();
            let value = value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value);
            if value.is_empty() {
                return Err(ConfigError::Field { line, field: full, msg: "empty value".into() });
            }
            if let Some(prev) = map.get(&full).map(|e: &Entry| e.line) {
                return Err(ConfigError::Field { line, field: full, msg: format!("already set on line {prev}") });
            }
            map.insert(full, Entry { line, value: value.to_string(), used: Cell::new(false) });
        }
        Ok(Entries(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(e) = self.0.get(key) else { return Ok(None) };
        e.used.set(true);
        e.value
            .parse::<T>()
            .map(Some)
            .map_err(|err| ConfigError::Field { line: e.line, field: key.to_string(), msg: format!("'{}': {err}", e.value) })
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn unused(&self) -> Option<(String, usize)> {
        self.0.iter().find(|(_, e)| !e.used.get()).map(|(k, e)| (k.clone(), e.line))
    }
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.split('.').all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
}

/// Per-kind defaults; every one of them can be overridden from the file.
struct Defaults {
    profile: &'static str,
    dim: usize,
    alpha: f64,
    horizon: f64,
    shape: &'static str,
    radius: f64,
    points: usize,
    numerics: Numerics,
}

fn defaults(kind: ScenarioKind) -> Defaults {
    let base = Numerics {
        dt: 1e-4,
        t_start: 0.0,
        t_end: 0.5,
        stride: 1,
        snapshots: 5,
        tol: 1e-3,
        eps: 1e-4,
        r_start: 0.01,
        r_end: 5.0,
        steps: 500,
        nodes: 257,
        grid: 32,
        samples: 5,
    };
    let d = Defaults { profile: "gaussian", dim: 2, alpha: 0.0, horizon: 2.0, shape: "circle", radius: 1.0, points: 256, numerics: base.clone() };
    match kind {
        ScenarioKind::SolitonSolve => Defaults { dim: 3, numerics: Numerics { tol: 1e-9, ..base }, ..d },
        ScenarioKind::BackgroundBuild => Defaults { numerics: Numerics { snapshots: 6, steps: 100, r_end: 3.0, tol: 1e-6, ..base }, ..d },
        ScenarioKind::McfRun => Defaults {
            shape: "perturbed_circle",
            radius: 2.5,
            numerics: Numerics { stride: 100, snapshots: 21, ..base },
            ..d
        },
        ScenarioKind::Monotonicity => Defaults {
            shape: "perturbed_circle",
            radius: 2.5,
            points: 512,
            numerics: Numerics { dt: 1e-5, stride: 20, snapshots: 11, ..base },
            ..d
        },
        ScenarioKind::Harnack => Defaults {
            profile: "grim_reaper_f",
            shape: "grim_reaper",
            points: 2048,
            numerics: Numerics { dt: 1e-3, tol: 1e-4, ..base },
            ..d
        },
        ScenarioKind::Variation => Defaults { profile: "euclidean", alpha: 1.0, numerics: Numerics { tol: 1e-4, ..base }, ..d },
        ScenarioKind::Thm1 => Defaults {
            profile: "euclidean",
            numerics: Numerics { t_end: 0.2, steps: 800, tol: 1e-2, ..base },
            ..d
        },
        ScenarioKind::FullSuite => d,
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let e = Entries::parse(text)?;
        let kind: ScenarioKind = e.get("scenario.kind")?.ok_or_else(|| invalid("scenario.kind", "missing"))?;
        let d = defaults(kind);
        let background = BackgroundSpec {
            profile: e.or("background.profile", d.profile.to_string())?,
            dim: e.or("background.dim", d.dim)?,
            alpha: e.or("background.alpha", d.alpha)?,
            class: e.get("background.class")?,
            horizon: e.or("background.horizon", d.horizon)?,
            slope: e.or("background.slope", 1.0)?,
        };
        let points = e.or("surface.points", d.points)?;
        let radius = e.or("surface.radius", d.radius)?;
        let shape_name: String = e.or("surface.shape", d.shape.to_string())?;
        let shape = match shape_name.as_str() {
            "sphere" => SurfaceShape::Sphere { radius },
            "circle" => SurfaceShape::Circle { radius },
            "perturbed_circle" => SurfaceShape::PerturbedCircle {
                radius,
                amplitude: e.or("surface.amplitude", 0.05)?,
                mode: e.or("surface.mode", 3)?,
            },
            "ellipse" => SurfaceShape::Ellipse { radius, aspect: e.or("surface.aspect", 1.5)? },
            "grim_reaper" => SurfaceShape::GrimReaper { half_length: e.or("surface.half_length", 4.0)? },
            other => return Err(invalid("surface.shape", format!("unknown shape '{other}'"))),
        };
        let n = d.numerics;
        let numerics = Numerics {
            dt: e.or("numerics.dt", n.dt)?,
            t_start: e.or("numerics.t_start", n.t_start)?,
            t_end: e.or("numerics.t_end", n.t_end)?,
            stride: e.or("numerics.stride", n.stride)?,
            snapshots: e.or("numerics.snapshots", n.snapshots)?,
            tol: e.or("numerics.tol", n.tol)?,
            eps: e.or("numerics.eps", n.eps)?,
            r_start: e.or("numerics.r_start", n.r_start)?,
            r_end: e.or("numerics.r_end", n.r_end)?,
            steps: e.or("numerics.steps", n.steps)?,
            nodes: e.or("numerics.nodes", n.nodes)?,
            grid: e.or("numerics.grid", n.grid)?,
            samples: e.or("numerics.samples", n.samples)?,
        };
        let cfg = ScenarioConfig {
            kind,
            seed: e.or("scenario.seed", 0)?,
            background,
            surface: SurfaceSpec { shape, points },
            numerics,
            output_dir: PathBuf::from(e.or("output.dir", kind.name().to_string())?),
            entries: e.0.iter().map(|(k, v)| (k.clone(), v.value.clone())).collect(),
        };
        if let Some((key, line)) = e.unused() {
            return Err(ConfigError::Field { line, field: key, msg: "unknown field".into() });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults for `kind` with no file.
    pub fn defaults(kind: ScenarioKind) -> Self {
        Self::parse(&format!("scenario.kind = {kind}")).expect("built-in defaults are valid")
    }

    /// Last time reached by a fixed-step family run.
    pub fn family_end(&self) -> f64 {
        let n = &self.numerics;
        n.t_start + n.dt * (n.stride * n.snapshots.saturating_sub(1)) as f64
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let n = &self.numerics;
        let positive = [
            ("numerics.dt", n.dt),
            ("numerics.tol", n.tol),
            ("numerics.eps", n.eps),
            ("numerics.r_start", n.r_start),
            ("background.horizon", self.background.horizon),
            ("background.slope", self.background.slope),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.background.alpha >= 0.0) {
            return Err(invalid("background.alpha", "coupling must be non-negative"));
        }
        if !(n.r_end > n.r_start) {
            return Err(invalid("numerics.r_end", "must exceed numerics.r_start"));
        }
        if !(n.t_end > n.t_start) {
            return Err(invalid("numerics.t_end", "must exceed numerics.t_start"));
        }
        let counts = [
            ("numerics.stride", n.stride, 1),
            ("numerics.snapshots", n.snapshots, 3),
            ("numerics.steps", n.steps, 1),
            ("numerics.nodes", n.nodes, 5),
            ("numerics.grid", n.grid, 8),
            ("numerics.samples", n.samples, 1),
            ("surface.points", self.surface.points, 8),
            ("background.dim", self.background.dim, 2),
        ];
        for (field, v, min) in counts {
            if v < min {
                return Err(invalid(field, format!("must be at least {min}, got {v}")));
            }
        }
        let shape_positive: Vec<(&str, f64)> = match &self.surface.shape {
            SurfaceShape::Sphere { radius } | SurfaceShape::Circle { radius } => vec![("surface.radius", *radius)],
            SurfaceShape::PerturbedCircle { radius, amplitude, .. } => {
                if amplitude.abs() >= *radius {
                    return Err(invalid("surface.amplitude", "must be smaller than the radius"));
                }
                vec![("surface.radius", *radius)]
            }
            SurfaceShape::Ellipse { radius, aspect } => vec![("surface.radius", *radius), ("surface.aspect", *aspect)],
            SurfaceShape::GrimReaper { half_length } => vec![("surface.half_length", *half_length)],
        };
        for (field, v) in shape_positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be positive, got {v}")));
            }
        }
        let class = super::profiles::lookup(&self.background.profile).and_then(|p| p.class_for(&self.background).ok());
        if let Some(class) = class {
            let end = match self.kind {
                ScenarioKind::McfRun | ScenarioKind::Monotonicity | ScenarioKind::Harnack => self.family_end(),
                _ => n.t_end,
            };
            let t = self.background.horizon;
            match class {
                SolitonClass::Shrinking if end >= t => {
                    return Err(invalid("background.horizon", format!("shrinking window ends at {end} ≥ T = {t}")))
                }
                SolitonClass::Expanding if n.t_start <= t => {
                    return Err(invalid("background.horizon", format!("expanding window starts at {} ≤ T = {t}", n.t_start)))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_dotted_keys_agree() {
        let a = ScenarioConfig::parse("scenario.kind = monotonicity\nnumerics.dt = 2e-5\n").unwrap();
        let b = ScenarioConfig::parse("[scenario]\nkind = monotonicity # comment\n[numerics]\ndt = 2e-5\n").unwrap();
        assert_eq!(a.numerics, b.numerics);
        assert_eq!(a.numerics.dt, 2e-5);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let e = ScenarioConfig::parse("scenario.kind = thm1\n\nnumerics.dt = fast\n").unwrap_err();
        assert!(matches!(&e, ConfigError::Field { line: 3, field, .. } if field == "numerics.dt"), "{e}");
        let e = ScenarioConfig::parse("scenario.kind = thm1\nnumerics.dtt = 1\n").unwrap_err();
        assert!(matches!(&e, ConfigError::Field { line: 2, msg, .. } if msg == "unknown field"), "{e}");
        let e = ScenarioConfig::parse("scenario.kind = thm1\njust words\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, .. }));
        let e = ScenarioConfig::parse("scenario.kind = thm1\nnumerics.dt = 1\nnumerics.dt = 2\n").unwrap_err();
        assert!(matches!(e, ConfigError::Field { line: 3, .. }));
    }

    #[test]
    fn knobs_must_be_positive() {
        let e = ScenarioConfig::parse("scenario.kind = mcf-run\nnumerics.dt = -1e-3\n").unwrap_err();
        assert!(matches!(&e, ConfigError::Invalid { field, .. } if field == "numerics.dt"));
        assert!(ScenarioConfig::parse("scenario.kind = variation\nnumerics.grid = 4\n").is_err());
    }

    #[test]
    fn shrinking_window_must_end_before_the_horizon() {
        let text = "scenario.kind = monotonicity\nbackground.class = shrinking\nbackground.horizon = 0.001\n";
        assert!(matches!(ScenarioConfig::parse(text), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn every_kind_has_valid_defaults() {
        for k in ScenarioKind::ALL {
            let c = ScenarioConfig::defaults(k);
            assert_eq!(c.kind, k);
            assert_eq!(c.output_dir, PathBuf::from(k.name()));
        }
    }
}
