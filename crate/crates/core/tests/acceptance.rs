//! Acceptance suite: one line per criterion, then a nonzero exit if any
//! criterion fails that is not a known defect of its own statement.
//!
//! Two statements cannot hold for any correct implementation and are
//! reported as FAIL without failing the run:
//! - 9b: a valid upper bound must carry the mass of the density beyond
//!   10/rho_t, which for the discretized 1-stable model is several percent.
//! - 11: for a Pareto law, (1 - G*G)/(1 - G) tends to 2, not 1.

use levy_density::bounds::{
    bell_power_bound, bell_subexp_bound, bell_upper_ball_mass, compound_ball_mass, convolution_domination_check,
    fit_lower, fit_upper, subexp_diagnostic, BellOptions, BoundReport, RadialTail, Sweep, SweepOptions,
    TailDistribution, UpperFamily,
};
use levy_density::decomposition::decompose;
use levy_density::density::{default_grid, density_by_decomposition, density_fourier, Which};
use levy_density::exponent::{check_condition_a, check_sandwich, log_space};
use levy_density::grid::GridSpec;
use levy_density::levy_model::norm;
use levy_density::models::{all_presets, preset};
use levy_density::process::Process;
use levy_density::Error;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

// tolerances, as stated by the criteria
const C1_REL: f64 = 1e-5;
const C1_SECONDS: f64 = 5.0;
const C2_REL: f64 = 1e-4;
const C2_SECONDS: f64 = 60.0;
const MASK: f64 = 1e-6;
const C3_SLOPE: f64 = 0.01;
const C4_POINTS: usize = 5000;
const C5_SUP: f64 = 1e-4;
const C6_REFIT: f64 = 0.05;
const C8_RATIO: f64 = 50.0;
const C9_BELL_GROWTH: f64 = 10.0;
const C9_COMPOUND_GROWTH: f64 = 0.01;
const C10_CHANGE: f64 = 0.02;
const C11_TOL: f64 = 0.02;
const C11_EXP_RATIO: f64 = 10.0;

const SWEEP: [f64; 3] = [1e-3, 1e-2, 1e-1];

struct Outcome {
    id: &'static str,
    pass: bool,
    known_defect: bool,
    detail: String,
    took: Duration,
}

struct Suite {
    outcomes: Vec<Outcome>,
}

impl Suite {
    fn run(&mut self, id: &'static str, known_defect: bool, f: impl FnOnce() -> (bool, String)) {
        let start = Instant::now();
        let (pass, detail) = f();
        let o = Outcome {
            id,
            pass,
            known_defect,
            detail,
            took: start.elapsed(),
        };
        let tag = match (o.pass, o.known_defect) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known defect of the criterion)",
        };
        println!("criterion {:<3} {tag}  [{:.1}s] {}", o.id, o.took.as_secs_f64(), o.detail);
        self.outcomes.push(o);
    }
}

fn process(name: &str) -> Process {
    Process::new(preset(name).unwrap().triplet)
}

fn c1() -> (bool, String) {
    let start = Instant::now();
    let p = process("stable-1d-cauchy");
    let mut worst = 0.0f64;
    for t in [0.01, 0.1, 1.0] {
        let g = default_grid(&p, t).unwrap();
        let d = density_fourier(&p, t, &g, Which::Full).unwrap();
        let peak = d.peak();
        for (j, v) in d.values.iter().enumerate() {
            let x = g.coord(j);
            let exact = t / (PI * (t * t + x * x));
            if exact > MASK * peak {
                worst = worst.max((v - exact).abs() / exact);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        worst <= C1_REL && secs <= C1_SECONDS,
        format!("Cauchy n=1: max rel err {worst:.2e} (<= {C1_REL:e}), {secs:.2}s (<= {C1_SECONDS}s)"),
    )
}

fn c2() -> (bool, String) {
    let p = process("stable-2d-cauchy");
    let (mut worst, mut slowest) = (0.0f64, 0.0f64);
    for t in [0.01, 0.1, 1.0] {
        let start = Instant::now();
        let g = GridSpec::new(2, 20.0 / p.rho(t).unwrap(), 1024).unwrap();
        let d = density_fourier(&p, t, &g, Which::Full).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let peak = d.peak();
        for (j, v) in d.values.iter().enumerate() {
            let r2 = norm(&g.point(j)).powi(2);
            let exact = t / (2.0 * PI) * (t * t + r2).powf(-1.5);
            if exact > MASK * peak {
                worst = worst.max((v - exact).abs() / exact);
            }
        }
    }
    (
        worst <= C2_REL && slowest <= C2_SECONDS,
        format!("Cauchy n=2 at 1024^2: max rel err {worst:.2e} (<= {C2_REL:e}), slowest t {slowest:.2}s (<= {C2_SECONDS}s)"),
    )
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn c3() -> (bool, String) {
    let ts = log_space(1e-4, 1e-1, 7);
    let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["stable-1d-a07", "stable-1d-cauchy", "stable-1d", "stable-2d-cauchy", "stable-2d"] {
        let pr = preset(name).unwrap();
        let alpha = pr.expected.alpha_effective.unwrap();
        let p = Process::new(pr.triplet);
        let lr: Vec<f64> = ts.iter().map(|&t| p.rho(t).unwrap().ln()).collect();
        let s = slope(&lt, &lr);
        let err = (s + 1.0 / alpha).abs();
        ok &= err <= C3_SLOPE;
        parts.push(format!("{name} {s:.5} vs {:.5}", -1.0 / alpha));
    }
    (ok, format!("log-log slopes (+-{C3_SLOPE}): {}", parts.join(", ")))
}

fn c4() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for pr in all_presets() {
        let p = Process::new(pr.triplet.clone());
        let dirs = p.sphere.len();
        let radii = log_space(1e-2, 1e4, C4_POINTS.div_ceil(dirs).max(2));
        let s = check_sandwich(&pr.triplet, &radii, &p.sphere).unwrap();
        let sandwich = s.violations == 0 && s.points >= C4_POINTS;
        let mut mass_ok = true;
        let mut worst_mass = 0.0f64;
        if pr.expected.condition_a {
            let n = p.dim();
            for t in log_space(1e-4, 1e-1, 7) {
                let m = decompose(&p, t).unwrap().lambda_mass;
                worst_mass = worst_mass.max(m);
                mass_ok &= m <= (n + 1) as f64;
            }
        }
        ok &= sandwich && mass_ok;
        parts.push(format!("{} {}pts/{}viol mass<={:.3}", pr.name, s.points, s.violations, worst_mass));
    }
    (ok, parts.join("; "))
}

fn c5() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, points) in [("stable-1d", 4096), ("discretized-stable-2d", 512)] {
        let p = process(name);
        let mut worst = 0.0f64;
        for t in SWEEP {
            let g = GridSpec::new(p.dim(), 20.0 / p.rho(t).unwrap(), points).unwrap();
            let a = density_fourier(&p, t, &g, Which::Full).unwrap();
            let (b, _) = density_by_decomposition(&p, t, &g).unwrap();
            let sup = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst = worst.max(sup / a.peak());
        }
        ok &= worst <= C5_SUP;
        parts.push(format!("{name} sup/peak {worst:.2e}"));
    }
    (ok, format!("{} (<= {C5_SUP:e})", parts.join(", ")))
}

fn constants(r: &BoundReport) -> Vec<f64> {
    r.shape.constants().iter().map(|c| c.1).collect()
}

struct Fitted {
    name: &'static str,
    symmetric: bool,
    sweep: Sweep,
    upper: BoundReport,
}

fn c6(fitted: &mut Vec<Fitted>) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for pr in all_presets().into_iter().filter(|p| p.expected.condition_a) {
        let p = Process::new(pr.triplet.clone());
        let sweep = Sweep::build(&p, &SWEEP, &SweepOptions::default()).unwrap();
        let upper = fit_upper(&sweep, UpperFamily::ExpDecay).unwrap();
        let fine = fit_upper(&sweep.refined(&p).unwrap(), UpperFamily::ExpDecay).unwrap();
        let change = constants(&upper)
            .iter()
            .zip(constants(&fine))
            .map(|(a, b)| ((b - a) / a).abs())
            .fold(0.0, f64::max);
        let mut line = format!("{} change {:.2}%", pr.name, 100.0 * change);
        let mut this = upper.verdict && fine.verdict && change < C6_REFIT;
        if sweep.symmetric {
            let l = fit_upper(&sweep, UpperFamily::ExpLogDecay).unwrap();
            this &= l.verdict;
            line.push_str(if l.verdict { " +explog" } else { " explog FAILED" });
        }
        if !upper.verdict {
            line.push_str(&format!(" exp FAILED {:?}", upper.witness));
        }
        ok &= this;
        parts.push(line);
        fitted.push(Fitted {
            name: pr.name,
            symmetric: sweep.symmetric,
            sweep,
            upper,
        });
    }
    (ok, format!("feasible, refit < {}%: {}", 100.0 * C6_REFIT, parts.join("; ")))
}

fn c7(fitted: &[Fitted]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for f in fitted {
        let l = fit_lower(&f.sweep).unwrap();
        let centred = !f.symmetric || f.sweep.entries.iter().all(|e| e.x_t.iter().all(|c| *c == 0.0));
        ok &= l.verdict && centred;
        let c = constants(&l);
        parts.push(format!("{} b3={:.3} b4={:.3}{}", f.name, c[0], c[1], if f.symmetric { " x_t=0" } else { "" }));
    }
    (ok, parts.join("; "))
}

fn c8() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["stable-1d-cauchy", "stable-1d", "stable-2d-cauchy", "stable-2d"] {
        let pr = preset(name).unwrap();
        let alpha = pr.expected.alpha_effective.unwrap();
        let p = Process::new(pr.triplet);
        let r = bell_power_bound(&p, &SWEEP, alpha, &BellOptions::default()).unwrap();
        let ratio = r.c1 / r.c2;
        ok &= r.two_sided() && ratio <= C8_RATIO;
        parts.push(format!("{name} c1/c2={ratio:.2}"));
    }
    (ok, format!("{} (<= {C8_RATIO})", parts.join(", ")))
}

const C9_T: f64 = 1e-2;

fn c9a() -> (bool, String) {
    let p = process("discretized-stable-2d");
    let rho = p.rho(C9_T).unwrap();
    let tail = RadialTail::Power { alpha: 1.0 };
    let b = bell_subexp_bound(&p, &[C9_T], tail, 1.0, &BellOptions::default()).unwrap();
    let m10 = bell_upper_ball_mass(2, b.c1, rho, 1.0, tail, 10.0 / rho);
    let m1000 = bell_upper_ball_mass(2, b.c1, rho, 1.0, tail, 1000.0 / rho);
    let growth = m1000 / m10;
    (
        b.upper && growth > C9_BELL_GROWTH,
        format!("bell bound with 1-G = |x|^-1: ball mass {m10:.4} -> {m1000:.4}, x{growth:.1} (> {C9_BELL_GROWTH})"),
    )
}

fn c9b(fitted: &[Fitted]) -> (bool, String) {
    let f = fitted.iter().find(|f| f.name == "discretized-stable-2d").unwrap();
    let p = process(f.name);
    let rho = p.rho(C9_T).unwrap();
    let c = constants(&f.upper);
    let m10 = compound_ball_mass(&p, C9_T, c[0], c[1], 10.0 / rho).unwrap();
    let m1000 = compound_ball_mass(&p, C9_T, c[0], c[1], 1000.0 / rho).unwrap();
    let inc = m1000 / m10 - 1.0;
    // the density's own mass beyond 10/rho, from the same grid as the fit
    let e = f.sweep.entries.iter().find(|e| e.t == C9_T).unwrap();
    let g = e.window();
    let inside: f64 = (0..g.len())
        .filter(|&i| norm(&g.point(i)) * rho <= 10.0)
        .map(|i| e.density.values[i])
        .sum::<f64>()
        * g.cell_volume();
    (
        inc < C9_COMPOUND_GROWTH,
        format!(
            "compound kernel bound ball mass {m10:.4} -> {m1000:.4}, +{:.2}% (< {}%); density itself has {:.2}% of its mass beyond 10/rho",
            100.0 * inc,
            100.0 * C9_COMPOUND_GROWTH,
            100.0 * (1.0 - inside)
        ),
    )
}

fn c10() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, b) in [(1, 1.0), (2, 1.0), (1, 0.5)] {
        let r = convolution_domination_check(n, b, None, None).unwrap();
        ok &= r.c.is_finite() && r.change < C10_CHANGE;
        parts.push(format!("(n={n}, b={b}) C={:.4} change {:.3}%", r.c, 100.0 * r.change));
    }
    (ok, format!("{} (< {}%)", parts.join(", "), 100.0 * C10_CHANGE))
}

fn c11() -> (bool, String) {
    let xs = log_space(10.0, 1e5, 5);
    let par = subexp_diagnostic(&TailDistribution::Pareto { alpha: 1.5 }, &xs, 1.0, C11_TOL).unwrap();
    let exp = subexp_diagnostic(&TailDistribution::Exponential { lambda: 1.0 }, &log_space(1.0, 30.0, 5), 1.0, C11_TOL).unwrap();
    let ok = par.verdict && !exp.verdict && exp.last_ratio() > C11_EXP_RATIO;
    (
        ok,
        format!(
            "Pareto(1.5) last ratio {:.4} (want 1 +- {C11_TOL}); exponential last ratio {:.1} (> {C11_EXP_RATIO}, verdict {})",
            par.last_ratio(),
            exp.last_ratio(),
            exp.verdict
        ),
    )
}

fn c12() -> (bool, String) {
    let p = process("axis-degenerate-2d");
    let rep = check_condition_a(p.measure(), &p.sphere, &log_space(10.0, 1e6, 50)).unwrap();
    let w = &rep.worst;
    let named = w.psi_lower_inf == 0.0 && (norm(&w.direction_inf) - 1.0).abs() < 1e-12;
    let atoms = process("tabulated-atoms-1d");
    let g = GridSpec::new(1, 10.0, 256).unwrap();
    let refused = density_fourier(&atoms, 0.1, &g, Which::Full) == Err(Error::FiniteMeasure)
        && matches!(default_grid(&atoms, 0.1), Err(Error::FiniteMeasure));
    (
        !rep.passed && named && refused,
        format!(
            "axis-degenerate-2d fails with witness direction {:?} at r = {:.3e}; atoms refused: {refused}",
            w.direction_inf, w.r
        ),
    )
}

fn main() {
    // `cargo test -- --list` and filters pass arguments; run only on a plain invocation
    if std::env::args().skip(1).any(|a| a == "--list") {
        return;
    }
    let mut s = Suite { outcomes: Vec::new() };
    let mut fitted = Vec::new();
    s.run("1", false, c1);
    s.run("2", false, c2);
    s.run("3", false, c3);
    s.run("4", false, c4);
    s.run("5", false, c5);
    s.run("6", false, || c6(&mut fitted));
    s.run("7", false, || c7(&fitted));
    s.run("8", false, c8);
    s.run("9a", false, c9a);
    s.run("9b", true, || c9b(&fitted));
    s.run("10", false, c10);
    s.run("11", true, c11);
    s.run("12", false, c12);
    let hard: Vec<&str> = s.outcomes.iter().filter(|o| !o.pass && !o.known_defect).map(|o| o.id).collect();
    let total: f64 = s.outcomes.iter().map(|o| o.took.as_secs_f64()).sum();
    println!(
        "acceptance: {} pass, {} known-defect fail, {} fail, {total:.0}s",
        s.outcomes.iter().filter(|o| o.pass).count(),
        s.outcomes.iter().filter(|o| !o.pass && o.known_defect).count(),
        hard.len()
    );
    if !hard.is_empty() {
        eprintln!("failed: {}", hard.join(", "));
        std::process::exit(1);
    }
}
