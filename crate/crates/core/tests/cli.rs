use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn geoflow(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoflow"))
        .args(args)
        .env("GEOFLOW_OUTPUT", out)
        .output()
        .expect("binary runs")
}

fn run_config(dir: &Path, text: &str) -> Output {
    let cfg = dir.join("scenario.toml");
    fs::write(&cfg, text).unwrap();
    geoflow(&dir.join("out"), &["run", cfg.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_profiles_names_every_background() {
    let dir = tempfile::tempdir().unwrap();
    let o = geoflow(dir.path(), &["list-profiles"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["euclidean", "gaussian", "cigar", "grim_reaper_f", "flat_cylinder"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn syntax_error_reports_the_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario.kind = monotonicity\n\nnumerics.dt 1e-5\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn unknown_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario.kind = mcf-run\n[numerics]\ndtt = 1e-5\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("numerics.dtt"), "{}", stderr(&o));
}

#[test]
fn unstable_time_step_is_refused_before_stepping() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario.kind = mcf-run\nbackground.profile = euclidean\nnumerics.dt = 0.1\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stability limit"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn shrinking_run_past_the_singular_time_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario.kind = monotonicity\nbackground.horizon = 0.001\n");
    assert_eq!(o.status.code(), Some(2));
}

fn phi_column(csv: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "phi").expect("phi column");
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn monotonicity_run_writes_a_decreasing_phi_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "[scenario]\nkind = monotonicity\n[output]\ndir = mono\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out/mono");
    let phi = phi_column(&fs::read_to_string(out.join("phi_series.csv")).unwrap());
    assert_eq!(phi.len(), 11);
    assert!(phi.windows(2).all(|w| w[1] < w[0]), "{phi:?}");
    for f in ["summary.csv", "summary.txt", "plot.py", "metadata.json", "phi_rates.csv"] {
        assert!(out.join(f).is_file(), "{f} not written");
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["scenario"], "monotonicity");
    assert_eq!(meta["passed"], true);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = "scenario.kind = variation\nscenario.seed = 7\nnumerics.samples = 2\n";
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(run_config(d.path(), cfg).status.code(), Some(0));
    }
    for f in ["variation.csv", "summary.csv", "metadata.json"] {
        let x = fs::read(a.path().join("out/variation").join(f)).unwrap();
        let y = fs::read(b.path().join("out/variation").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
}

#[test]
fn unmet_tolerance_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario.kind = thm1\nnumerics.tol = 1e-12\n");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("thm1"), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("out/thm1/summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().ends_with("false"), "{summary}");
}

#[test]
fn suite_subcommand_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = geoflow(dir.path(), &["suite"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let table = fs::read_to_string(dir.path().join("full-suite/suite.csv")).unwrap();
    assert_eq!(table.lines().count(), 12);
}
