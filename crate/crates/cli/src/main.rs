//! Batch front end for levy-density.
//!
//! Exit status: 0 when every verdict passes, 1 when some verdict fails
//! (listed in `failures.csv` in the output directory and on stderr), 2 on
//! bad input or a numerical error.

mod commands;
mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};
use levy_density::config;
use levy_density::exponent::log_space;
use levy_density::models::{preset, ModelPreset};
use levy_density::process::Process;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Comparability condition on sampled radii and directions.
    CheckA,
    /// `(t, rho_t, t psi_star(rho_t))`.
    RhoTable,
    /// Shift, big-jump mass and series truncation per time.
    Decompose,
    /// Densities on the default window, dumped per time.
    Density,
    /// Compound kernel upper and lower fits.
    Bounds,
    /// Single-kernel two-sided bound.
    Bell,
    /// Convolution tail ratios of one-dimensional laws.
    SubexpDiag,
    /// Everything above except the density dumps, in one summary.
    Report,
    /// Named models.
    ListModels,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckA => "check-a",
            Command::RhoTable => "rho-table",
            Command::Decompose => "decompose",
            Command::Density => "density",
            Command::Bounds => "bounds",
            Command::Bell => "bell",
            Command::SubexpDiag => "subexp-diag",
            Command::Report => "report",
            Command::ListModels => "list-models",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Full,
    Recentred,
    Bar,
}

/// Transition densities of Levy processes and their kernel bounds.
///
/// A run is configured by a TOML file (`--config`), flags, or both; flags
/// win. Times are `--t 1e-3,1e-2` or `--t geom:1e-3:1e-1:5`.
#[derive(Debug, Parser)]
#[command(name = "levy-density", version, after_help = ENV_HELP)]
pub struct Cli {
    /// Command to run (same as --cmd).
    #[arg(value_enum)]
    command: Option<Command>,
    #[arg(long = "cmd", value_enum, conflicts_with = "command")]
    cmd: Option<Command>,
    /// Run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name; see list-models.
    #[arg(long)]
    model: Option<String>,
    /// Times: comma list or geom:FROM:TO:COUNT.
    #[arg(long = "t")]
    t: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Points per axis of the density or sweep grid.
    #[arg(long)]
    points: Option<usize>,
    /// Window half-width in units of 1/rho_t.
    #[arg(long)]
    window_radius: Option<f64>,
    /// Law dumped by `density`.
    #[arg(long, value_enum, default_value_t = Which::Full)]
    which: Which,
    /// `density`: also write the dumps as CSV.
    #[arg(long)]
    dump_csv: bool,
    /// `density`: compare with the route through the decomposition.
    #[arg(long)]
    routes: bool,
    /// `bounds`: fit first derivatives too.
    #[arg(long)]
    derivatives: bool,
    /// `bounds`: refit on a grid with twice the points.
    #[arg(long)]
    refine: bool,
    /// `bell`: exponent b in (1 + rho |x|)^(-n-b); defaults to the model index.
    #[arg(long)]
    b: Option<f64>,
    /// `bell`: tail 1 - G for models without a density, e.g. power:1.
    #[arg(long)]
    bell_tail: Option<String>,
    /// `bell`: radii (units of 1/rho_t) for ball masses of the bound.
    #[arg(long)]
    ball_radii: Option<String>,
    /// `subexp-diag`: laws, e.g. pareto:1.5,exponential:1.
    #[arg(long)]
    tail: Option<String>,
    /// `check-a`: radii as FROM:TO:COUNT.
    #[arg(long)]
    r_range: Option<String>,
    /// Bisection width in log r for rho_t.
    #[arg(long)]
    tol_rho: Option<f64>,
    /// Allowed |t psi_star(rho_t) - 1|.
    #[arg(long)]
    tol_identity: Option<f64>,
    /// Slack of fitted bound verdicts.
    #[arg(long)]
    tol_report: Option<f64>,
    /// Truncation of the compound series.
    #[arg(long)]
    tol_eps_tail: Option<f64>,
    /// Density values below this fraction of the peak are ignored.
    #[arg(long)]
    tol_noise: Option<f64>,
    /// Allowed route gap, as a fraction of the peak.
    #[arg(long)]
    tol_route: Option<f64>,
    /// Allowed relative change of refitted constants.
    #[arg(long)]
    tol_refit: Option<f64>,
    /// Limit the subexponential ratios should approach.
    #[arg(long)]
    tol_subexp_target: Option<f64>,
    /// Allowed distance of the last ratio from the target.
    #[arg(long)]
    tol_subexp: Option<f64>,
}

const ENV_HELP: &str = "Environment:\n  LEVY_DENSITY_CACHE  directory where computed density grids are cached\n\n\
Config file keys: model, process (inline dim/drift/measure), t or t_sweep{from,to,count},\n\
out, threads, grid{points,window_radius}, tol{rho,identity,report,eps_tail,noise,route,refit,subexp_target,subexp}";

#[derive(Debug, Clone)]
pub struct Tolerances {
    pub rho: f64,
    pub identity: f64,
    pub report: f64,
    pub eps_tail: f64,
    pub noise: f64,
    pub route: f64,
    pub refit: f64,
    pub subexp_target: f64,
    pub subexp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rho: 1e-10,
            identity: 1e-8,
            report: levy_density::bounds::REPORT_TOL,
            eps_tail: 1e-10,
            noise: levy_density::bounds::NOISE_FLOOR,
            route: 1e-4,
            refit: 0.05,
            // the standard limit for sums of two iid copies
            subexp_target: 2.0,
            subexp: 0.02,
        }
    }
}

pub struct RunConfig {
    pub model_name: String,
    pub preset: Option<ModelPreset>,
    pub process: Process,
    pub ts: Vec<f64>,
    pub ts_given: bool,
    pub out: PathBuf,
    pub points: Option<usize>,
    pub window_radius: Option<f64>,
    pub tol: Tolerances,
    pub cli: Cli,
}

fn config_err(key: &str, msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("config error at `{key}`: {msg}")
}

fn float_at(t: &Table, key: &str, path: &str) -> Result<Option<f64>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Float(x)) => Ok(Some(*x)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(_) => Err(config_err(path, "expected a number")),
    }
}

fn positive(x: f64, key: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(config_err(key, format!("must be positive, got {x}")))
    }
}

pub fn parse_times(s: &str) -> Result<Vec<f64>> {
    let mut ts = if let Some(rest) = s.strip_prefix("geom:") {
        let p: Vec<&str> = rest.split(':').collect();
        if p.len() != 3 {
            bail!("config error at `t`: geom needs FROM:TO:COUNT");
        }
        let lo: f64 = p[0].parse().map_err(|e| config_err("t", e))?;
        let hi: f64 = p[1].parse().map_err(|e| config_err("t", e))?;
        let n: usize = p[2].parse().map_err(|e| config_err("t", e))?;
        if n == 0 || !(lo > 0.0 && hi >= lo) {
            bail!("config error at `t`: need 0 < FROM <= TO and COUNT >= 1");
        }
        log_space(lo, hi, n)
    } else {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| config_err("t", format!("`{x}`: {e}"))))
            .collect::<Result<Vec<_>>>()?
    };
    for t in &ts {
        positive(*t, "t")?;
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    Ok(ts)
}

pub fn parse_list(s: &str, key: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| config_err(key, format!("`{x}`: {e}"))))
        .collect()
}

impl RunConfig {
    fn load(cli: Cli) -> Result<Self> {
        let file: Table = match &cli.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                text.parse::<Table>().map_err(|e| anyhow!("config parse error in {}: {e}", p.display()))?
            }
            None => Table::new(),
        };
        let known = ["model", "process", "t", "t_sweep", "out", "threads", "grid", "tol"];
        if let Some(k) = file.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(config_err(k, "unknown key"));
        }

        let (model_name, preset, triplet) = if let Some(name) = &cli.model {
            let p = preset(name)?;
            (name.clone(), Some(p.clone()), p.triplet)
        } else if let Some(v) = file.get("process") {
            let t = v.as_table().ok_or_else(|| config_err("process", "expected a table"))?;
            let tr = config::from_table(t).map_err(|e| match e {
                levy_density::Error::Config { key, message } => config_err(&format!("process.{key}"), message),
                e => e.into(),
            })?;
            ("custom".to_string(), None, tr)
        } else if let Some(v) = file.get("model") {
            let name = v.as_str().ok_or_else(|| config_err("model", "expected a string"))?;
            let p = preset(name).map_err(|e| config_err("model", e))?;
            (name.to_string(), Some(p.clone()), p.triplet)
        } else {
            let cmd = cli.command.or(cli.cmd);
            if matches!(cmd, Some(Command::ListModels) | Some(Command::SubexpDiag)) {
                let p = preset("stable-1d-cauchy")?;
                ("stable-1d-cauchy".into(), Some(p.clone()), p.triplet)
            } else {
                bail!("no model: pass --model NAME, or set `model` or `process` in --config");
            }
        };

        let mut ts_given = true;
        let ts = if let Some(s) = &cli.t {
            parse_times(s)?
        } else if let Some(v) = file.get("t") {
            let arr = v.as_array().ok_or_else(|| config_err("t", "expected an array of numbers"))?;
            let mut ts = Vec::new();
            for (i, x) in arr.iter().enumerate() {
                let key = format!("t[{i}]");
                let x = x.as_float().or(x.as_integer().map(|i| i as f64)).ok_or_else(|| config_err(&key, "expected a number"))?;
                ts.push(positive(x, &key)?);
            }
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            ts
        } else if let Some(v) = file.get("t_sweep") {
            let t = v.as_table().ok_or_else(|| config_err("t_sweep", "expected a table"))?;
            let lo = float_at(t, "from", "t_sweep.from")?.ok_or_else(|| config_err("t_sweep.from", "missing"))?;
            let hi = float_at(t, "to", "t_sweep.to")?.ok_or_else(|| config_err("t_sweep.to", "missing"))?;
            let n = t
                .get("count")
                .and_then(Value::as_integer)
                .ok_or_else(|| config_err("t_sweep.count", "expected an integer"))?;
            positive(lo, "t_sweep.from")?;
            if hi < lo {
                return Err(config_err("t_sweep.to", "must not be below `from`"));
            }
            if n < 1 {
                return Err(config_err("t_sweep.count", "must be at least 1"));
            }
            log_space(lo, hi, n as usize)
        } else {
            ts_given = false;
            vec![1e-3, 1e-2, 1e-1]
        };

        let out = match (&cli.out, file.get("out")) {
            (Some(p), _) => p.clone(),
            (None, Some(v)) => PathBuf::from(v.as_str().ok_or_else(|| config_err("out", "expected a string"))?),
            (None, None) => PathBuf::from("levy-out"),
        };

        let threads = match (cli.threads, file.get("threads")) {
            (Some(n), _) => Some(n),
            (None, Some(v)) => {
                let n = v.as_integer().filter(|n| *n >= 1).ok_or_else(|| config_err("threads", "expected a positive integer"))?;
                Some(n as usize)
            }
            _ => None,
        };
        if let Some(n) = threads {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
        }

        let mut points = cli.points;
        let mut window_radius = cli.window_radius;
        if let Some(v) = file.get("grid") {
            let g = v.as_table().ok_or_else(|| config_err("grid", "expected a table"))?;
            if points.is_none() {
                if let Some(p) = g.get("points") {
                    let p = p.as_integer().filter(|p| *p >= 2).ok_or_else(|| config_err("grid.points", "expected an integer >= 2"))?;
                    points = Some(p as usize);
                }
            }
            if window_radius.is_none() {
                window_radius = float_at(g, "window_radius", "grid.window_radius")?.map(|w| positive(w, "grid.window_radius")).transpose()?;
            }
        }

        let mut tol = Tolerances::default();
        if let Some(v) = file.get("tol") {
            let t = v.as_table().ok_or_else(|| config_err("tol", "expected a table"))?;
            let slots: [(&str, &mut f64); 9] = [
                ("rho", &mut tol.rho),
                ("identity", &mut tol.identity),
                ("report", &mut tol.report),
                ("eps_tail", &mut tol.eps_tail),
                ("noise", &mut tol.noise),
                ("route", &mut tol.route),
                ("refit", &mut tol.refit),
                ("subexp_target", &mut tol.subexp_target),
                ("subexp", &mut tol.subexp),
            ];
            let names: Vec<&str> = slots.iter().map(|s| s.0).collect();
            if let Some(k) = t.keys().find(|k| !names.contains(&k.as_str())) {
                return Err(config_err(&format!("tol.{k}"), "unknown tolerance"));
            }
            for (k, slot) in slots {
                let path = format!("tol.{k}");
                if let Some(x) = float_at(t, k, &path)? {
                    *slot = positive(x, &path)?;
                }
            }
        }
        let flags = [
            (cli.tol_rho, &mut tol.rho, "tol-rho"),
            (cli.tol_identity, &mut tol.identity, "tol-identity"),
            (cli.tol_report, &mut tol.report, "tol-report"),
            (cli.tol_eps_tail, &mut tol.eps_tail, "tol-eps-tail"),
            (cli.tol_noise, &mut tol.noise, "tol-noise"),
            (cli.tol_route, &mut tol.route, "tol-route"),
            (cli.tol_refit, &mut tol.refit, "tol-refit"),
            (cli.tol_subexp_target, &mut tol.subexp_target, "tol-subexp-target"),
            (cli.tol_subexp, &mut tol.subexp, "tol-subexp"),
        ];
        for (v, slot, name) in flags {
            if let Some(x) = v {
                *slot = positive(x, name)?;
            }
        }

        let process = Process::new(triplet).with_rho_tolerance(tol.rho);
        Ok(RunConfig {
            model_name,
            preset,
            process,
            ts,
            ts_given,
            out,
            points,
            window_radius,
            tol,
            cli,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }
}

fn run(cli: Cli) -> Result<bool> {
    let command = cli
        .command
        .or(cli.cmd)
        .ok_or_else(|| anyhow!("no command: give one as an argument or with --cmd (see --help)"))?;
    if command == Command::ListModels {
        commands::list_models();
        return Ok(true);
    }
    let cfg = RunConfig::load(cli)?;
    std::fs::create_dir_all(cfg.out_dir()).with_context(|| format!("creating {}", cfg.out_dir().display()))?;
    let mut v = output::Verdicts::default();
    commands::dispatch(command, &cfg, &mut v)?;
    let failures = v.table(cfg.out_dir(), "failures.csv", true);
    failures.write()?;
    for c in v.failures() {
        eprintln!("FAIL {} {}: {}", c.command, c.name, c.detail);
    }
    println!(
        "{}: {} checks, {} failed; outputs in {}",
        command.name(),
        v.checks.len(),
        v.failures().count(),
        cfg.out_dir().display()
    );
    Ok(v.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
