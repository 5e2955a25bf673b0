use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-density"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("LEVY_DENSITY_CACHE")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap()
}

#[test]
fn check_a_cauchy_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["check-a", "--model", "stable-1d-cauchy"]);
    assert!(o.status.success());
    let csv = read(d.path(), "check_a.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "true");
    let beta: f64 = row[2].parse().unwrap();
    assert!(beta.is_finite() && beta > 1.0);
}

#[test]
fn check_a_degenerate_names_the_direction() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["--cmd", "check-a", "--model", "axis-degenerate-2d"]);
    assert_eq!(o.status.code(), Some(1));
    let f = read(d.path(), "failures.csv");
    assert!(f.contains("condition-a") && f.contains("direction [0.0, 1.0]"), "{f}");
}

#[test]
fn rho_table_slope_and_determinism() {
    let d = tempfile::tempdir().unwrap();
    let args = ["rho-table", "--model", "stable-1d-cauchy", "--t", "1e-3,1e-2,1e-1"];
    assert!(run(d.path(), &args).status.success());
    let first = read(d.path(), "rho_table.csv");
    let rows: Vec<(f64, f64)> = first
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (c[0], c[1])
        })
        .collect();
    let slope = (rows[2].1.ln() - rows[0].1.ln()) / (rows[2].0.ln() - rows[0].0.ln());
    assert!((slope + 1.0).abs() <= 0.01, "{slope}");
    assert!(run(d.path(), &args).status.success());
    assert_eq!(first, read(d.path(), "rho_table.csv"));
}

#[test]
fn config_errors_cite_the_key() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(
        &cfg,
        "t = [0.01]\n[process]\ndim = 1\n[process.measure]\nvariant = \"isotropic-stable\"\nalpha = 2.5\nc = 1.0\n",
    )
    .unwrap();
    let o = run(d.path(), &["check-a", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`process.measure.alpha`"));

    std::fs::write(&cfg, "model = \"stable-1d\"\nt_sweep = { from = 0.1, to = 0.01, count = 3 }\n").unwrap();
    let o = run(d.path(), &["rho-table", "--config", cfg.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`t_sweep.to`"));
}

#[test]
fn finite_measure_has_no_density() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["density", "--model", "tabulated-atoms-1d"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("finitely many jumps"));
}

#[test]
fn subexp_defaults_classify_both_laws() {
    let d = tempfile::tempdir().unwrap();
    assert!(run(d.path(), &["subexp-diag"]).status.success());
    let s = read(d.path(), "subexp_summary.csv");
    assert!(s.contains("pareto:1.5") && s.contains("exponential:1"));
}

#[test]
fn density_cache_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let cache = d.path().join("cache");
    let go = || {
        Command::new(env!("CARGO_BIN_EXE_levy-density"))
            .args(["density", "--model", "stable-1d-cauchy", "--t", "0.1", "--out"])
            .arg(d.path())
            .env("LEVY_DENSITY_CACHE", &cache)
            .output()
            .unwrap()
    };
    assert!(go().status.success());
    let first = read(d.path(), "density.csv");
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    assert!(go().status.success());
    assert_eq!(first, read(d.path(), "density.csv"));
}
