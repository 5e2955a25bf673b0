use super::sweep::{Sweep, SweepEntry};
use super::{BoundReport, BoundRow, Direction, KernelShape, REPORT_TOL};
use crate::error::{Error, Result};
use crate::exponent::log_space;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperFamily {
    ExpDecay,
    ExpLogDecay,
}

impl UpperFamily {
    pub fn shape(self, b1: f64, b2: f64) -> KernelShape {
        match self {
            UpperFamily::ExpDecay => KernelShape::ExpDecay { b1, b2 },
            UpperFamily::ExpLogDecay => KernelShape::ExpLogDecay { b1, b2 },
        }
    }
}

/// Search box for the decay rate.
const B2_RANGE: (f64, f64) = (1e-2, 1e2);
/// Leading constants above this count as infeasible.
const B1_MAX: f64 = 1e8;

/// The data an upper fit dominates at one time, and where it is checked.
struct Target<'a> {
    entry: &'a SweepEntry,
    values: Vec<f64>,
    mask: Vec<usize>,
}

/// `max data / (rho^p K)` over the mask, with the node where it happens.
fn worst_upper(t: &Target, shape: &KernelShape, power: usize) -> Result<(f64, usize)> {
    let e = t.entry;
    let k = e.field.on_window(shape, e.rho.powi(power as i32), e.rho, e.window())?;
    let mut best = (f64::NEG_INFINITY, 0);
    for &i in &t.mask {
        let q = t.values[i] / k[i];
        if q > best.0 {
            best = (q, i);
        }
    }
    Ok(best)
}

fn b1_of(targets: &[Target], family: UpperFamily, b2: f64, power: usize) -> Result<f64> {
    let unit = family.shape(1.0, b2);
    let r: Vec<f64> = targets
        .par_iter()
        .map(|t| worst_upper(t, &unit, power).map(|w| w.0))
        .collect::<Result<_>>()?;
    Ok(r.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn fit_upper_on(sweep: &Sweep, targets: Vec<Target>, family: UpperFamily, power: usize) -> Result<BoundReport> {
    let n = sweep.dim;
    // minimise b1(b2) * \int f_{1,b2}, the mass of the m = 0 term
    let cost = |lb2: f64| -> Result<f64> {
        let b2 = lb2.exp();
        let b1 = b1_of(&targets, family, b2, power)?;
        Ok(b1.ln() + family.shape(1.0, b2).integral(n)?.ln())
    };
    let (lo, hi) = (B2_RANGE.0.ln(), B2_RANGE.1.ln());
    let scan: Vec<f64> = (0..13).map(|i| lo + (hi - lo) * i as f64 / 12.0).collect();
    let costs: Vec<f64> = scan.iter().map(|&x| cost(x)).collect::<Result<_>>()?;
    let best = (0..costs.len()).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap();
    let (mut a, mut b) = (scan[best.saturating_sub(1)], scan[(best + 1).min(12)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (cost(c)?, cost(d)?);
    while b - a > 1e-4 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d)?;
        }
    }
    let b2 = (0.5 * (a + b)).exp();
    let b1 = b1_of(&targets, family, b2, power)?;
    let feasible = b1.is_finite() && b1 > 0.0 && b1 <= B1_MAX;
    let shape = family.shape(if b1 > 0.0 { b1 } else { 1.0 }, b2);
    let mut rows = Vec::new();
    let mut remainder = 0.0f64;
    for t in &targets {
        let e = t.entry;
        let (ratio, at) = worst_upper(t, &shape, power)?;
        let k = e.field.on_window(&shape, e.rho.powi(power as i32), e.rho, e.window())?;
        let violations = t
            .mask
            .iter()
            .filter(|&&i| t.values[i] > k[i] * (1.0 + REPORT_TOL))
            .count();
        remainder = remainder.max(e.field.remainder(&shape, e.rho.powi(power as i32)));
        rows.push(BoundRow {
            t: e.t,
            rho: e.rho,
            worst_ratio: ratio,
            worst_point: e.window().point(at),
            violations,
            centre: vec![0.0; n],
        });
    }
    Ok(BoundReport {
        direction: Direction::Upper,
        shape,
        sigma_power: power,
        rows,
        feasible,
        verdict: false,
        margin: 0.0,
        report_tol: REPORT_TOL,
        remainder,
        witness: (!feasible).then(|| format!("no b1 below {B1_MAX:e} for b2 in {B2_RANGE:?}")),
    }
    .finish())
}

/// Smallest-mass `(b1, b2)` with `r_t(x) <= sum_m (1/m!) \int rho^n
/// f(rho (x - y)) Lambda_t^{*m}(dy)` on every unmasked node of the sweep.
pub fn fit_upper(sweep: &Sweep, family: UpperFamily) -> Result<BoundReport> {
    if family == UpperFamily::ExpLogDecay && !sweep.symmetric {
        return Err(Error::Refused("the log-refined shape needs a symmetric process".into()));
    }
    let floor = sweep.options.noise_floor;
    let targets = sweep
        .entries
        .iter()
        .map(|e| Target {
            entry: e,
            values: e.density.values.clone(),
            mask: e.mask(floor),
        })
        .collect();
    fit_upper_on(sweep, targets, family, sweep.dim)
}

/// As [`fit_upper`] for `max_i |d r_t / dx_i|` with `rho^{n+1}` in front.
pub fn fit_derivative_upper(sweep: &Sweep, family: UpperFamily) -> Result<BoundReport> {
    if sweep.entries.iter().any(|e| e.gradient.len() != sweep.dim) {
        return Err(Error::InvalidArgument("sweep was built without gradients".into()));
    }
    let floor = sweep.options.noise_floor;
    let targets = sweep
        .entries
        .iter()
        .map(|e| {
            let values = (0..e.density.values.len())
                .map(|i| e.gradient.iter().map(|g| g.values[i].abs()).fold(0.0, f64::max))
                .collect();
            Target {
                entry: e,
                values,
                mask: e.mask(floor),
            }
        })
        .collect();
    fit_upper_on(sweep, targets, family, sweep.dim + 1)
}

/// `(rho |x|, r_t(x_t + x) / rho^n)` at every node whose shift by `x_t`
/// stays in the window, sorted by radius.
fn centred_profile(e: &SweepEntry) -> Vec<(f64, f64, usize)> {
    let g = e.window();
    let n = g.dim;
    let h = g.spacing();
    let off: Vec<i64> = e.x_t.iter().map(|c| (c / h).round() as i64).collect();
    let scale = e.rho.powi(n as i32);
    let mut out: Vec<(f64, f64, usize)> = (0..g.len())
        .filter_map(|i| {
            let ix = g.unflatten(i);
            let mut jx = [0usize; 3];
            for d in 0..n {
                let j = ix[d] as i64 + off[d];
                if j < 0 || j >= g.points as i64 {
                    return None;
                }
                jx[d] = j as usize;
            }
            let r = g.point(i).iter().map(|c| c * c).sum::<f64>().sqrt() * e.rho;
            let k = g.flatten(&jx[..n]);
            Some((r, e.density.values[k] / scale, k))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `(b3, b4)` maximising `b3 b4^n` with `r_t(x_t + x) >= b3 rho^n` for
/// `|x| <= b4 / rho` at every time.
pub fn fit_lower(sweep: &Sweep) -> Result<BoundReport> {
    let n = sweep.dim;
    let profiles: Vec<Vec<(f64, f64, usize)>> = sweep.entries.iter().map(centred_profile).collect();
    let runmins: Vec<Vec<f64>> = profiles
        .iter()
        .map(|p| {
            let mut m = f64::INFINITY;
            p.iter()
                .map(|q| {
                    m = m.min(q.1);
                    m
                })
                .collect()
        })
        .collect();
    // b3 for a given b4: the least running minimum over the sweep
    let b3_of = |b4: f64| -> f64 {
        profiles
            .iter()
            .zip(&runmins)
            .map(|(p, m)| {
                let k = p.partition_point(|q| q.0 <= b4);
                if k == 0 {
                    f64::NEG_INFINITY
                } else {
                    m[k - 1]
                }
            })
            .fold(f64::INFINITY, f64::min)
    };
    let reach = profiles
        .iter()
        .map(|p| p.last().map_or(0.0, |q| q.0))
        .fold(f64::INFINITY, f64::min);
    let step = sweep.entries.iter().map(|e| e.rho * e.window().spacing()).fold(0.0, f64::max);
    // b4 -> 0: only the centre itself
    let mut best = (0.0, b3_of(0.0), 0.0);
    for b4 in log_space(step, 0.9 * reach / (n as f64).sqrt(), 240) {
        let b3 = b3_of(b4);
        let obj = b3 * b4.powi(n as i32);
        if b3 > 0.0 && obj > best.0 {
            best = (obj, b3, b4);
        }
    }
    let (b3, b4) = if best.0 > 0.0 { (best.1, best.2) } else { (best.1, step) };
    let feasible = b3 > 0.0 && b3.is_finite();
    let shape = KernelShape::Indicator {
        b3: if feasible { b3 } else { 1.0 },
        b4,
    };
    let mut rows = Vec::new();
    for (e, p) in sweep.entries.iter().zip(&profiles) {
        let inside: Vec<&(f64, f64, usize)> = p.iter().take_while(|q| q.0 <= b4).collect();
        let (mut worst, mut at) = (f64::INFINITY, e.density.grid.origin_index());
        let mut violations = 0;
        for q in &inside {
            let ratio = q.1 / shape.scale();
            if ratio < worst {
                worst = ratio;
                at = q.2;
            }
            if ratio < 1.0 - REPORT_TOL {
                violations += 1;
            }
        }
        rows.push(BoundRow {
            t: e.t,
            rho: e.rho,
            worst_ratio: worst,
            worst_point: e.window().point(at),
            violations,
            centre: e.x_t.clone(),
        });
    }
    Ok(BoundReport {
        direction: Direction::Lower,
        shape,
        sigma_power: n,
        rows,
        feasible,
        verdict: false,
        margin: 0.0,
        report_tol: REPORT_TOL,
        remainder: 0.0,
        witness: (!feasible).then(|| "density is not positive at x_t".to_string()),
    }
    .finish())
}
