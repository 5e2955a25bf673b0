use crate::output::{num, vector, Table, Verdicts};
use crate::{parse_list, Command, RunConfig, Which as WhichArg};
use anyhow::{anyhow, bail, Context, Result};
use levy_density::bounds::{
    bell_power_bound, bell_subexp_bound, bell_upper_ball_mass, fit_derivative_upper, fit_lower, fit_upper,
    subexp_diagnostic, BellOptions, BellReport, BoundReport, RadialTail, Sweep, SweepOptions,
    TailDistribution, UpperFamily,
};
use levy_density::config::to_toml;
use levy_density::decomposition::{decompose, truncation_order};
use levy_density::density::{default_grid, density_by_decomposition, density_fourier, DensityGrid, Which};
use levy_density::exponent::{check_condition_a, log_space};
use levy_density::grid::GridSpec;
use levy_density::models::all_presets;
use rayon::prelude::*;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;

pub fn dispatch(cmd: Command, cfg: &RunConfig, v: &mut Verdicts) -> Result<()> {
    match cmd {
        Command::CheckA => check_a(cfg, v),
        Command::RhoTable => rho_table(cfg, v),
        Command::Decompose => decomposition(cfg, v),
        Command::Density => density(cfg, v, true),
        Command::Bounds => bounds(cfg, v),
        Command::Bell => bell(cfg, v),
        Command::SubexpDiag => subexp(cfg, v),
        Command::Report => report(cfg, v),
        Command::ListModels => {
            list_models();
            Ok(())
        }
    }
}

pub fn list_models() {
    for p in all_presets() {
        println!("{:<24} n={}  {:<20} {}", p.name, p.triplet.dim(), p.triplet.measure.variant_name(), p.description);
    }
}

fn radii(cfg: &RunConfig) -> Result<Vec<f64>> {
    let Some(s) = &cfg.cli.r_range else {
        return Ok(log_space(10.0, 1e6, 50));
    };
    let p: Vec<&str> = s.split(':').collect();
    let bad = || anyhow!("config error at `r-range`: expected FROM:TO:COUNT with 0 < FROM < TO");
    if p.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = p[0].parse().map_err(|_| bad())?;
    let hi: f64 = p[1].parse().map_err(|_| bad())?;
    let n: usize = p[2].parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(bad());
    }
    Ok(log_space(lo, hi, n))
}

fn check_a(cfg: &RunConfig, v: &mut Verdicts) -> Result<()> {
    let p = &cfg.process;
    let rep = check_condition_a(p.measure(), &p.sphere, &radii(cfg)?).context("exponent")?;
    let mut t = Table::new(
        cfg.out_dir(),
        "check_a.csv",
        &["model", "passed", "beta_hat", "witness_r", "direction_sup", "direction_inf", "psi_star", "psi_lower_inf"],
    );
    let w = &rep.worst;
    t.row(vec![
        cfg.model_name.clone(),
        rep.passed.to_string(),
        num(rep.beta_hat),
        num(w.r),
        vector(&w.direction_sup),
        vector(&w.direction_inf),
        num(w.psi_star),
        num(w.psi_lower_inf),
    ]);
    t.write()?;
    let mut s = Table::new(cfg.out_dir(), "check_a_samples.csv", &["r", "ratio"]);
    for (r, q) in &rep.samples {
        s.row(vec![num(*r), num(*q)]);
    }
    s.write()?;
    let detail = if rep.passed {
        format!("beta_hat = {}", rep.beta_hat)
    } else {
        format!(
            "psi_L vanishes in direction {:?} at r = {} (psi_star = {})",
            w.direction_inf, w.r, w.psi_star
        )
    };
    v.push("check-a", "condition-a", rep.passed, detail);
    Ok(())
}

fn rho_table(cfg: &RunConfig, v: &mut Verdicts) -> Result<()> {
    let p = &cfg.process;
    let rows: Vec<(f64, f64, f64)> = cfg
        .ts
        .par_iter()
        .map(|&t| -> Result<_> {
            let rho = p.rho(t).context("exponent")?;
            Ok((t, rho, t * p.psi_star(rho)?))
        })
        .collect::<Result<_>>()?;
    let mut tab = Table::new(cfg.out_dir(), "rho_table.csv", &["t", "rho", "t_psi_star"]);
    for (t, rho, id) in &rows {
        tab.row(vec![num(*t), num(*rho), num(*id)]);
        let ok = (id - 1.0).abs() <= cfg.tol.identity;
        v.push("rho-table", format!("identity t={t}"), ok, format!("t psi_star(rho_t) = {id}"));
    }
    tab.write()?;
    if rows.len() >= 2 {
        let (a, b) = (rows[0], rows[rows.len() - 1]);
        let slope = (b.1.ln() - a.1.ln()) / (b.0.ln() - a.0.ln());
        println!("log-log slope of rho_t over the sweep: {slope:.6}");
    }
    Ok(())
}

fn decomposition(cfg: &RunConfig, v: &mut Verdicts) -> Result<()> {
    let p = &cfg.process;
    let n = p.dim();
    let rows = cfg
        .ts
        .par_iter()
        .map(|&t| decompose(p, t))
        .collect::<levy_density::Result<Vec<_>>>()
        .context("decomposition")?;
    let mut tab = Table::new(
        cfg.out_dir(),
        "decompose.csv",
        &["t", "rho", "a_t", "lambda_mass", "mass_bound", "order", "tail_bound"],
    );
    for d in &rows {
        let (order, tail) = truncation_order(d.lambda_mass, cfg.tol.eps_tail);
        tab.row(vec![
            num(d.t),
            num(d.rho),
            vector(&d.a_t),
            num(d.lambda_mass),
            num((n + 1) as f64),
            order.to_string(),
            num(tail),
        ]);
        let ok = d.lambda_mass <= (n + 1) as f64;
        v.push("decompose", format!("lambda-mass t={}", d.t), ok, format!("{} <= {}", d.lambda_mass, n + 1));
    }
    tab.write()?;
    Ok(())
}

fn density_grid(cfg: &RunConfig, t: f64) -> Result<GridSpec> {
    let p = &cfg.process;
    if cfg.points.is_none() && cfg.window_radius.is_none() {
        return Ok(default_grid(p, t)?);
    }
    let def = default_grid(p, t)?;
    let rho = p.rho(t)?;
    let extent = cfg.window_radius.map_or(def.extent, |w| w / rho);
    Ok(GridSpec::new(p.dim(), extent, cfg.points.unwrap_or(def.points))?)
}

fn which(w: WhichArg) -> Which {
    match w {
        WhichArg::Full => Which::Full,
        WhichArg::Recentred => Which::Recentred,
        WhichArg::Bar => Which::Bar,
    }
}

/// Density from the cache directory when `LEVY_DENSITY_CACHE` is set.
fn cached_density(cfg: &RunConfig, t: f64, g: &GridSpec, w: Which) -> Result<DensityGrid> {
    let compute = || density_fourier(&cfg.process, t, g, w).context("density");
    let Some(dir) = std::env::var_os("LEVY_DENSITY_CACHE") else {
        return compute();
    };
    let mut h = DefaultHasher::new();
    to_toml(&cfg.process.triplet)?.hash(&mut h);
    (t.to_bits(), g.dim, g.extent.to_bits(), g.points, w.name()).hash(&mut h);
    let path = PathBuf::from(dir).join(format!("density-{:016x}.bin", h.finish()));
    if let Ok(d) = DensityGrid::load(&path) {
        return Ok(d);
    }
    let d = compute()?;
    std::fs::create_dir_all(path.parent().expect("file in a directory"))?;
    d.save(&path)?;
    Ok(d)
}

fn density(cfg: &RunConfig, v: &mut Verdicts, dump: bool) -> Result<()> {
    let w = which(cfg.cli.which);
    let mut tab = Table::new(
        cfg.out_dir(),
        "density.csv",
        &["t", "rho", "points", "extent", "peak", "riemann_mass", "min", "route_gap", "file"],
    );
    for (i, &t) in cfg.ts.iter().enumerate() {
        let g = density_grid(cfg, t)?;
        let d = cached_density(cfg, t, &g, w)?;
        let mut file = String::new();
        if dump {
            let name = format!("density_{i:03}.bin");
            d.save(&cfg.out_dir().join(&name))?;
            if cfg.cli.dump_csv {
                let mut c = Table::new(cfg.out_dir(), &format!("density_{i:03}.csv"), &header(g.dim));
                for (j, x) in d.values.iter().enumerate() {
                    let mut row: Vec<String> = g.point(j).into_iter().map(num).collect();
                    row.push(num(*x));
                    c.row(row);
                }
                c.write()?;
            }
            file = name;
        }
        let finite = d.values.iter().all(|x| x.is_finite());
        v.push("density", format!("finite t={t}"), finite, format!("{} nodes", d.values.len()));
        let mut gap = f64::NAN;
        if cfg.cli.routes {
            if w != Which::Full {
                bail!("--routes compares the full density; drop --which");
            }
            let (c, _) = density_by_decomposition(&cfg.process, t, &g).context("density")?;
            gap = d.values.iter().zip(&c.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / d.peak();
            v.push("density", format!("routes t={t}"), gap <= cfg.tol.route, format!("sup gap / peak = {gap}"));
        }
        tab.row(vec![
            num(t),
            num(cfg.process.rho(t)?),
            g.points.to_string(),
            num(g.extent),
            num(d.peak()),
            num(d.riemann_mass()),
            num(d.min()),
            num(gap),
            file,
        ]);
    }
    tab.write()?;
    Ok(())
}

fn header(n: usize) -> Vec<&'static str> {
    let mut h = vec!["x1", "x2", "x3"][..n].to_vec();
    h.push("value");
    h
}

fn sweep_options(cfg: &RunConfig) -> SweepOptions {
    let mut o = SweepOptions {
        eps_tail: cfg.tol.eps_tail,
        noise_floor: cfg.tol.noise,
        gradient: cfg.cli.derivatives,
        points: cfg.points,
        ..SweepOptions::default()
    };
    if let Some(w) = cfg.window_radius {
        o.window_radius = w;
    }
    o
}

/// Verdict with the run's own slack in place of the library default.
fn holds(r: &BoundReport, tol: f64) -> bool {
    r.feasible && r.margin >= -tol
}

fn bounds(cfg: &RunConfig, v: &mut Verdicts) -> Result<()> {
    let p = &cfg.process;
    let sweep = Sweep::build(p, &cfg.ts, &sweep_options(cfg)).context("bounds")?;
    let mut fits: Vec<(&'static str, BoundReport)> = vec![("upper-exp", fit_upper(&sweep, UpperFamily::ExpDecay)?)];
    if sweep.symmetric {
        fits.push(("upper-explog", fit_upper(&sweep, UpperFamily::ExpLogDecay)?));
    }
    fits.push(("lower", fit_lower(&sweep)?));
    if cfg.cli.derivatives {
        fits.push(("derivative-exp", fit_derivative_upper(&sweep, UpperFamily::ExpDecay)?));
    }
    let refit = if cfg.cli.refine {
        let fine = sweep.refined(p)?;
        Some(fit_upper(&fine, UpperFamily::ExpDecay)?)
    } else {
        None
    };

    let mut tab = Table::new(
        cfg.out_dir(),
        "bounds.csv",
        &["fit", "family", "direction", "constants", "feasible", "verdict", "margin", "remainder", "witness"],
    );
    let mut rows = Table::new(
        cfg.out_dir(),
        "bounds_rows.csv",
        &["fit", "t", "rho", "worst_ratio", "worst_point", "violations", "centre"],
    );
    for (name, r) in &fits {
        let consts = r.shape.constants().iter().map(|(k, x)| format!("{k}={}", num(*x))).collect::<Vec<_>>().join(";");
        let ok = holds(r, cfg.tol.report);
        tab.row(vec![
            name.to_string(),
            r.shape.family().into(),
            r.direction.to_string(),
            consts.clone(),
            r.feasible.to_string(),
            ok.to_string(),
            num(r.margin),
            num(r.remainder),
            r.witness.clone().unwrap_or_default(),
        ]);
        for row in &r.rows {
            rows.row(vec![
                name.to_string(),
                num(row.t),
                num(row.rho),
                num(row.worst_ratio),
                vector(&row.worst_point),
                row.violations.to_string(),
                vector(&row.centre),
            ]);
        }
        let detail = r.witness.clone().unwrap_or(consts);
        v.push("bounds", *name, ok, detail);
    }
    if sweep.symmetric {
        let centred = sweep.entries.iter().all(|e| e.x_t.iter().all(|c| *c == 0.0));
        v.push("bounds", "x_t-at-origin", centred, "symmetric model");
    }
    if let Some(fine) = refit {
        let base = &fits[0].1;
        let change = base
            .shape
            .constants()
            .iter()
            .zip(fine.shape.constants())
            .map(|((_, a), (_, b))| ((b - a) / a).abs())
            .fold(0.0, f64::max);
        tab.row(vec![
            "upper-exp-refined".into(),
            fine.shape.family().into(),
            fine.direction.to_string(),
            fine.shape.constants().iter().map(|(k, x)| format!("{k}={}", num(*x))).collect::<Vec<_>>().join(";"),
            fine.feasible.to_string(),
            holds(&fine, cfg.tol.report).to_string(),
            num(fine.margin),
            num(fine.remainder),
            fine.witness.clone().unwrap_or_default(),
        ]);
        v.push("bounds", "refit-change", change < cfg.tol.refit, format!("largest relative change {change}"));
    }
    tab.write()?;
    rows.write()?;
    Ok(())
}

fn parse_tail(s: &str) -> Result<RadialTail> {
    let (k, a) = s.split_once(':').ok_or_else(|| anyhow!("config error at `bell-tail`: expected power:A or exponential:L"))?;
    let a: f64 = a.parse().map_err(|e| anyhow!("config error at `bell-tail`: {e}"))?;
    Ok(match k {
        "power" => RadialTail::Power { alpha: a },
        "exponential" => RadialTail::Exponential { lambda: a },
        _ => bail!("config error at `bell-tail`: unknown tail `{k}`"),
    })
}

fn bell(cfg: &RunConfig, v: &mut Verdicts) -> Result<()> {
    let p = &cfg.process;
    let n = p.dim();
    let b = match (cfg.cli.b, cfg.preset.as_ref().and_then(|p| p.expected.alpha_effective)) {
        (Some(b), _) | (None, Some(b)) => b,
        (None, None) => bail!("bell needs --b for this model"),
    };
    let mut opts = BellOptions {
        noise_floor: cfg.tol.noise,
        points: cfg.points,
        ..BellOptions::default()
    };
    if let Some(w) = cfg.window_radius {
        opts.window_radius = w;
    }
    let power = p.measure().has_density() && cfg.cli.bell_tail.is_none();
    let tail = match &cfg.cli.bell_tail {
        Some(s) => parse_tail(s)?,
        None => RadialTail::Power { alpha: b },
    };
    let rep: BellReport = if power {
        bell_power_bound(p, &cfg.ts, b, &opts).context("bounds")?
    } else {
        bell_subexp_bound(p, &cfg.ts, tail, 1.0, &opts).context("bounds")?
    };
    let mut tab = Table::new(
        cfg.out_dir(),
        "bell.csv",
        &["kind", "c1", "c2", "ratio", "upper", "lower", "precondition_sup", "precondition_inf"],
    );
    tab.row(vec![
        if power { "power" } else { "tail" }.into(),
        num(rep.c1),
        num(rep.c2),
        num(rep.c1 / rep.c2),
        rep.upper.to_string(),
        rep.lower.to_string(),
        num(rep.precondition.sup),
        num(rep.precondition.inf),
    ]);
    tab.write()?;
    let mut rows = Table::new(
        cfg.out_dir(),
        "bell_rows.csv",
        &["t", "rho", "sup_ratio", "inf_ratio", "at_origin", "upper", "lower"],
    );
    for r in &rep.rows {
        rows.row(vec![
            num(r.t),
            num(r.rho),
            num(r.sup_ratio),
            num(r.inf_ratio),
            num(r.at_origin),
            r.upper.to_string(),
            r.lower.to_string(),
        ]);
    }
    rows.write()?;
    v.push("bell", "upper", rep.upper, format!("c1 = {}", rep.c1));
    if power {
        v.push("bell", "lower", rep.lower, format!("c2 = {}, c1/c2 = {}", rep.c2, rep.c1 / rep.c2));
    }
    if let Some(s) = &cfg.cli.ball_radii {
        let mut m = Table::new(cfg.out_dir(), "bell_ball_mass.csv", &["t", "radius_over_rho", "mass"]);
        for &t in &cfg.ts {
            let rho = p.rho(t)?;
            for r in parse_list(s, "ball-radii")? {
                let mass = bell_upper_ball_mass(n, rep.c1, rho, 1.0, tail, r / rho);
                m.row(vec![num(t), num(r), num(mass)]);
            }
        }
        m.write()?;
    }
    Ok(())
}

fn parse_laws(s: &str) -> Result<Vec<(String, TailDistribution)>> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            let bad = || anyhow!("config error at `tail`: expected pareto:A or exponential:L, got `{item}`");
            let (k, a) = item.split_once(':').ok_or_else(bad)?;
            let a: f64 = a.parse().map_err(|_| bad())?;
            let d = match k {
                "pareto" => TailDistribution::Pareto { alpha: a },
                "exponential" => TailDistribution::Exponential { lambda: a },
                _ => return Err(bad()),
            };
            Ok((item.to_string(), d))
        })
        .collect()
}

fn subexp(cfg: &RunConfig, v: &mut Verdicts) -> Result<()> {
    let laws = parse_laws(cfg.cli.tail.as_deref().unwrap_or("pareto:1.5,exponential:1"))?;
    let mut tab = Table::new(cfg.out_dir(), "subexp.csv", &["law", "x", "ratio"]);
    let mut sum = Table::new(
        cfg.out_dir(),
        "subexp_summary.csv",
        &["law", "last_ratio", "target", "consistent", "expected"],
    );
    for (name, law) in laws {
        let xs = match (cfg.ts_given, law) {
            (true, _) => cfg.ts.clone(),
            (false, TailDistribution::Pareto { .. }) => log_space(10.0, 1e5, 5),
            // far enough out to tell, not so far that the tail underflows
            (false, TailDistribution::Exponential { lambda }) => log_space(1.0 / lambda, 100.0 / lambda, 5),
        };
        let r = subexp_diagnostic(&law, &xs, cfg.tol.subexp_target, cfg.tol.subexp).context("bounds")?;
        for (x, q) in &r.rows {
            tab.row(vec![name.clone(), num(*x), num(*q)]);
        }
        let expected = matches!(law, TailDistribution::Pareto { .. });
        sum.row(vec![
            name.clone(),
            num(r.last_ratio()),
            num(r.target),
            r.verdict.to_string(),
            expected.to_string(),
        ]);
        v.push(
            "subexp-diag",
            name,
            r.verdict == expected,
            format!("last ratio {} vs target {}", r.last_ratio(), r.target),
        );
    }
    tab.write()?;
    sum.write()?;
    Ok(())
}

fn report(cfg: &RunConfig, v: &mut Verdicts) -> Result<()> {
    let cond = {
        let before = v.checks.len();
        check_a(cfg, v)?;
        v.checks[before].pass
    };
    rho_table(cfg, v)?;
    decomposition(cfg, v)?;
    let m = cfg.process.measure();
    if m.is_finite() {
        v.push("density", "infinite-measure", false, "finite Levy measure: no density");
    } else {
        density(cfg, v, false)?;
    }
    if cond && !m.is_finite() {
        bounds(cfg, v)?;
        let has_index = cfg.cli.b.is_some() || cfg.preset.as_ref().is_some_and(|p| p.expected.alpha_effective.is_some());
        if has_index {
            bell(cfg, v)?;
        }
    }
    subexp(cfg, v)?;
    v.table(cfg.out_dir(), "report.csv", false).write()?;
    Ok(())
}
