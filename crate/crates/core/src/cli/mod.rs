//! Command-line front end: scenario files in, CSV series, report summaries and
//! a plotting script out.

pub mod config;
pub mod profiles;
mod scenarios;

pub use config::{BackgroundSpec, ConfigError, Numerics, ScenarioConfig, ScenarioKind, SurfaceShape, SurfaceSpec};
pub use profiles::{lookup, BuiltBackground, Profile, PROFILES};

use crate::error::GeoError;
use crate::suite::Condition;
use crate::verify::FdReport;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable naming the directory under which scenarios write.
pub const OUTPUT_ENV: &str = "GEOFLOW_OUTPUT";
pub const DEFAULT_OUTPUT_ROOT: &str = "geoflow-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    CheckFailure = 1,
    ConfigError = 2,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    /// Rejected before any stepping.
    #[error("refused: {0}")]
    Refused(GeoError),
    #[error("{scenario} failed: {source}")]
    Pipeline { scenario: ScenarioKind, source: GeoError },
    #[error("io error on {path}: {msg}")]
    Io { path: PathBuf, msg: String },
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Config(_) | CliError::Refused(_) => ExitStatus::ConfigError,
            CliError::Pipeline { .. } | CliError::Io { .. } => ExitStatus::CheckFailure,
        }
    }
}

/// One emitted data file and the columns the plot script draws from it.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
    /// `(x column, y columns)`; `None` for files that are not plotted.
    pub plot: Option<(String, Vec<String>)>,
}

impl Artifact {
    fn data(file: &str, contents: String) -> Self {
        Artifact { file: file.to_string(), contents, plot: None }
    }

    fn plotted(file: &str, contents: String, x: &str, ys: &[&str]) -> Self {
        Artifact { file: file.to_string(), contents, plot: Some((x.to_string(), ys.iter().map(|s| s.to_string()).collect())) }
    }
}

/// What a scenario produced before anything is written.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub reports: Vec<FdReport>,
    pub conditions: Vec<Condition>,
    pub artifacts: Vec<Artifact>,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass) && self.conditions.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self.reports.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
        out.extend(self.conditions.iter().filter(|c| !c.pass).map(|c| c.name.clone()));
        out
    }

    fn condition(&mut self, name: &str, pass: bool, detail: String) {
        self.conditions.push(Condition { name: name.to_string(), detail, pass });
    }

    /// `summary.csv` rows: every report, then every condition with empty numeric columns.
    pub fn summary_csv(&self) -> String {
        let mut s = String::from(FdReport::csv_header());
        s.push('\n');
        for r in &self.reports {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        for c in &self.conditions {
            let _ = writeln!(s, "{},,,,,,,,,,condition,{}", c.name, c.pass);
        }
        s
    }

    pub fn summary_text(&self, kind: ScenarioKind) -> String {
        let total = self.reports.len() + self.conditions.len();
        let passed = self.reports.iter().filter(|r| r.pass).count() + self.conditions.iter().filter(|c| c.pass).count();
        let mut s = format!("scenario {kind}: {passed} of {total} checks passed\n");
        for r in &self.reports {
            let _ = writeln!(s, "{r}");
        }
        for c in &self.conditions {
            let _ = writeln!(s, "[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        s
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    scenario: &'a str,
    seed: u64,
    profile: &'a str,
    files: Vec<&'a str>,
    config: &'a BTreeMap<String, String>,
    checks: usize,
    passed: bool,
}

fn plot_script(artifacts: &[Artifact]) -> String {
    let mut s = String::from(
        "import csv\nimport sys\nfrom pathlib import Path\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n\
here = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent\n\n\n\
def columns(name):\n    with open(here / name) as fh:\n        rows = list(csv.DictReader(fh))\n    return {k: [float(r[k]) for r in rows] for k in rows[0]}\n\n\n\
PLOTS = [\n",
    );
    for a in artifacts {
        if let Some((x, ys)) = &a.plot {
            let ys: Vec<String> = ys.iter().map(|y| format!("\"{y}\"")).collect();
            let _ = writeln!(s, "    (\"{}\", \"{x}\", [{}]),", a.file, ys.join(", "));
        }
    }
    s.push_str(
        "]\n\nfor name, x, ys in PLOTS:\n    data = columns(name)\n    fig, axes = plt.subplots(len(ys), 1, figsize=(7, 2.5 * len(ys)), squeeze=False)\n    \
for ax, y in zip(axes[:, 0], ys):\n        ax.plot(data[x], data[y])\n        ax.set_xlabel(x)\n        ax.set_ylabel(y)\n    \
fig.tight_layout()\n    fig.savefig(here / (Path(name).stem + \".png\"), dpi=120)\n",
    );
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io { path: path.clone(), msg: e.to_string() })?;
    Ok(path)
}

/// Writes the artifacts, `summary.csv`, `summary.txt`, `metadata.json` and
/// `plot.py` into `dir`. Returns the written paths.
pub fn write_outputs(cfg: &ScenarioConfig, outcome: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), msg: e.to_string() })?;
    let mut written = Vec::new();
    for a in &outcome.artifacts {
        written.push(write_file(dir, &a.file, &a.contents)?);
    }
    written.push(write_file(dir, "summary.csv", &outcome.summary_csv())?);
    written.push(write_file(dir, "summary.txt", &outcome.summary_text(cfg.kind))?);
    written.push(write_file(dir, "plot.py", &plot_script(&outcome.artifacts))?);
    let meta = Metadata {
        scenario: cfg.kind.name(),
        seed: cfg.seed,
        profile: &cfg.background.profile,
        files: outcome.artifacts.iter().map(|a| a.file.as_str()).collect(),
        config: &cfg.entries,
        checks: outcome.reports.len() + outcome.conditions.len(),
        passed: outcome.pass(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Io { path: dir.join("metadata.json"), msg: e.to_string() })?;
    written.push(write_file(dir, "metadata.json", &(json + "\n"))?);
    Ok(written)
}

/// Validates, runs and writes one scenario under `root`.
pub fn run_scenario(cfg: &ScenarioConfig, root: &Path) -> Result<RunOutcome, CliError> {
    let outcome = scenarios::run(cfg)?;
    write_outputs(cfg, &outcome, &root.join(&cfg.output_dir))?;
    Ok(outcome)
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

pub fn list_profiles() -> String {
    let mut s = String::new();
    for p in PROFILES {
        let classes: Vec<String> = p.classes.iter().map(|c| format!("{c:?}").to_lowercase()).collect();
        let _ = writeln!(s, "{:<20} [{}] {}", p.name, classes.join("|"), p.description);
    }
    s
}
