//! Single-kernel ("bell") bounds `c rho^n g(rho |x|)` and the ball masses
//! that tell an integrable bound from a non-integrable one.

use super::{decade_rule, KernelShape, RadialTail, NOISE_FLOOR};
use crate::density::{density_fourier, Which};
use crate::error::{Error, Result};
use crate::exponent::log_space;
use crate::grid::GridSpec;
use crate::levy_model::norm;
use crate::process::Process;
use crate::quad::gauss_legendre;
use crate::special::{bessel_j1, sphere_area};
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct BellOptions {
    /// Window half-width in units of `1/rho_t`.
    pub window_radius: f64,
    /// Points per axis; `None` takes 16384, 1024 or 128.
    pub points: Option<usize>,
    /// Radii `|u|` (or `|v|`) at which the precondition is sampled.
    pub sample_radii: Vec<f64>,
    pub noise_floor: f64,
}

impl Default for BellOptions {
    fn default() -> Self {
        BellOptions {
            window_radius: 200.0,
            points: None,
            sample_radii: log_space(1.0, 1e3, 13),
            noise_floor: NOISE_FLOOR,
        }
    }
}

impl BellOptions {
    fn window(&self, n: usize, rho: f64) -> Result<GridSpec> {
        let p = self.points.unwrap_or(match n {
            1 => 16384,
            2 => 1024,
            _ => 128,
        });
        GridSpec::new(n, self.window_radius / rho, p)
    }
}

/// Sampled precondition on the rescaled measure, in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Precondition {
    /// The rescaled quantity stays below a constant multiple of the model.
    pub upper: bool,
    /// ... and above one.
    pub lower: bool,
    pub sup: f64,
    pub inf: f64,
    /// `(t, u)` of the largest sample.
    pub witness: (f64, Vec<f64>),
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellRow {
    pub t: f64,
    pub rho: f64,
    /// `max r_t / bound` and `min r_t / bound` at this time, before the
    /// constants are taken over the sweep.
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    /// `r_t(0) / (c1 rho^n)`: the on-diagonal entry.
    pub at_origin: f64,
    pub upper: bool,
    pub lower: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellReport {
    /// Fitted upper shape: `PowerDecay` or `TailFunction`.
    pub shape: KernelShape,
    pub precondition: Precondition,
    pub c1: f64,
    pub c2: f64,
    pub upper: bool,
    pub lower: bool,
    pub rows: Vec<BellRow>,
}

impl BellReport {
    pub fn two_sided(&self) -> bool {
        self.upper && self.lower
    }
}

fn precondition(samples: Vec<(f64, f64, f64, Vec<f64>)>) -> Precondition {
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.1, s.2)).collect();
    let (upper, lower) = decade_rule(&pairs);
    let top = samples
        .iter()
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .expect("samples");
    Precondition {
        upper,
        lower,
        sup: top.2,
        inf: samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min),
        witness: (top.0, top.3.clone()),
        samples: samples.len(),
    }
}

/// Ratios `r_t / (rho^n g(rho |x|))` over the window for `upper_g` and
/// `lower_g`, folded into a report.
fn fit_bell(
    process: &Process,
    ts: &[f64],
    opts: &BellOptions,
    upper_g: &(dyn Fn(f64) -> f64 + Sync),
    lower_g: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<(Vec<BellRow>, f64, f64, bool, bool)> {
    let n = process.dim();
    let mut rows = Vec::new();
    for &t in ts {
        let rho = process.rho(t)?;
        let g = opts.window(n, rho)?;
        let d = density_fourier(process, t, &g, Which::Recentred)?;
        let cut = opts.noise_floor * d.peak();
        let scale = rho.powi(n as i32);
        let (up, lo): (Vec<(f64, f64)>, Vec<(f64, f64)>) = (0..g.len())
            .into_par_iter()
            .filter(|&i| d.values[i] > cut)
            .map(|i| {
                let r = norm(&g.point(i)) * rho;
                let v = d.values[i] / scale;
                ((r, v / upper_g(r)), (r, v / lower_g(r)))
            })
            .unzip();
        let sup = up.iter().map(|s| s.1).fold(0.0, f64::max);
        let inf = lo.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        rows.push(BellRow {
            t,
            rho,
            sup_ratio: sup,
            inf_ratio: inf,
            at_origin: d.values[g.origin_index()] / (scale * upper_g(0.0)),
            upper: decade_rule(&up).0,
            lower: decade_rule(&lo).1,
        });
    }
    let c1 = rows.iter().map(|r| r.sup_ratio).fold(0.0, f64::max);
    let c2 = rows.iter().map(|r| r.inf_ratio).fold(f64::INFINITY, f64::min);
    for r in rows.iter_mut() {
        r.at_origin /= c1;
    }
    let upper = rows.iter().all(|r| r.upper);
    let lower = rows.iter().all(|r| r.lower);
    Ok((rows, c1, c2, upper, lower))
}

fn check_times(ts: &[f64]) -> Result<()> {
    if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidArgument("times must be positive".into()));
    }
    Ok(())
}

/// Two-sided `r_t(x) ≍ rho^n (1 + rho |x|)^{-n-b}`, after checking
/// `t rho^{-n} m(u / rho) <= C |u|^{-n-b}` on sampled `(t, u)`.
pub fn bell_power_bound(process: &Process, ts: &[f64], b: f64, opts: &BellOptions) -> Result<BellReport> {
    check_times(ts)?;
    if !(b > 0.0) {
        return Err(Error::InvalidArgument("b must be positive".into()));
    }
    let m = process.measure();
    if !m.has_density() {
        return Err(Error::Refused(format!("{} has no Levy density", m.variant_name())));
    }
    let n = process.dim();
    let e = n as f64 + b;
    let mut samples = Vec::new();
    for &t in ts {
        let rho = process.rho(t)?;
        for &r in &opts.sample_radii {
            for l in process.sphere.iter() {
                let u: Vec<f64> = l.iter().map(|c| c * r).collect();
                let x: Vec<f64> = u.iter().map(|c| c / rho).collect();
                let dens = m.density_at(&x).unwrap_or(0.0);
                samples.push((t, r, t * rho.powi(-(n as i32)) * dens * r.powf(e), u));
            }
        }
    }
    let pre = precondition(samples);
    if !pre.upper {
        return Err(Error::Refused(format!(
            "rescaled Levy density outgrows |u|^(-n-b): t = {}, u = {:?}",
            pre.witness.0, pre.witness.1
        )));
    }
    let g = move |r: f64| (1.0 + r).powf(-e);
    let (rows, c1, c2, upper, lower) = fit_bell(process, ts, opts, &g, &g)?;
    Ok(BellReport {
        shape: KernelShape::PowerDecay { c: c1, exponent: e },
        lower: lower && pre.lower,
        precondition: pre,
        c1,
        c2,
        upper,
        rows,
    })
}

/// `r_t(x) <= C1 rho^n (e^{-b2 rho |x|} + 1 - G(rho x))` after checking
/// `t mu(|u| > |v| / rho) <= C (1 - G(v))` on sampled `(t, v)`. The lower
/// side uses `1{rho |x| <= 1}` in place of the exponential.
pub fn bell_subexp_bound(
    process: &Process,
    ts: &[f64],
    tail: RadialTail,
    b2: f64,
    opts: &BellOptions,
) -> Result<BellReport> {
    check_times(ts)?;
    KernelShape::TailFunction { c: 1.0, tail }.validate()?;
    if !(b2 > 0.0) {
        return Err(Error::InvalidArgument("b2 must be positive".into()));
    }
    let m = process.measure();
    let mut samples = Vec::new();
    for &t in ts {
        let rho = process.rho(t)?;
        for &v in &opts.sample_radii {
            let q = t * m.tail_mass(v / rho)? / tail.value(v);
            samples.push((t, v, q, vec![v]));
        }
    }
    let pre = precondition(samples);
    if !pre.upper {
        return Err(Error::Refused(format!(
            "tail mass outgrows 1 - G: t = {}, |v| = {}",
            pre.witness.0, pre.witness.1[0]
        )));
    }
    let up = move |r: f64| (-b2 * r).exp() + tail.value(r);
    let lo = move |r: f64| if r <= 1.0 { 1.0 } else { 0.0 } + tail.value(r);
    let (rows, c1, c2, upper, lower) = fit_bell(process, ts, opts, &up, &lo)?;
    Ok(BellReport {
        shape: KernelShape::TailFunction { c: c1, tail },
        lower: lower && pre.lower,
        precondition: pre,
        c1,
        c2,
        upper,
        rows,
    })
}

/// Mass of `C1 rho^n (e^{-b2 rho |x|} + 1 - G(rho x))` over the ball of
/// radius `radius`, by a radial midpoint sum with step `0.01 / rho`.
pub fn bell_upper_ball_mass(n: usize, c1: f64, rho: f64, b2: f64, tail: RadialTail, radius: f64) -> f64 {
    let dr = 0.01 / rho;
    let steps = (radius / dr).ceil() as usize;
    let dr = radius / steps as f64;
    let area = sphere_area(n);
    (0..steps)
        .into_par_iter()
        .map(|k| {
            let r = (k as f64 + 0.5) * dr;
            area * r.powi(n as i32 - 1) * ((-b2 * rho * r).exp() + tail.value(rho * r))
        })
        .sum::<f64>()
        * dr
        * c1
        * rho.powi(n as i32)
}

/// Mass over the ball of radius `radius` of the compound kernel bound
/// `sum_m (1/m!) \int b1 rho^n e^{-b2 rho |x - y|} Lambda_t^{*m}(dy)`, for
/// isotropic measures, through the Fourier transform of the ball.
///
/// Shells beyond `4 radius` are left out: every convolution term they enter
/// puts its mass outside the ball, up to terms of second order in their
/// total mass.
pub fn compound_ball_mass(process: &Process, t: f64, b1: f64, b2: f64, radius: f64) -> Result<f64> {
    let m = process.measure();
    let n = process.dim();
    if !m.is_isotropic() {
        return Err(Error::Refused("ball masses need an isotropic measure".into()));
    }
    let rho = process.rho(t)?;
    let a = b2 * rho;
    let cut = (4.0 * radius).max(1.0 / rho);
    let policy = process.policy;
    let khat = |s: f64| -> Result<f64> {
        let mut xi = vec![0.0; n];
        xi[0] = s;
        let lam = t * m.big_jump_transform(&xi, 1.0 / rho, cut, policy)?.re;
        let f = match n {
            1 => 2.0 * a / (a * a + s * s),
            2 => 2.0 * PI * a / (a * a + s * s).powf(1.5),
            _ => 8.0 * PI * a / (a * a + s * s).powi(2),
        };
        Ok(b1 * rho.powi(n as i32) * f * lam.exp())
    };
    let ball = |s: f64| -> f64 {
        let x = radius * s;
        match n {
            1 => 2.0 / PI * if s == 0.0 { radius } else { x.sin() / s },
            2 => radius * bessel_j1(x),
            _ => {
                if x < 1e-3 {
                    2.0 / PI * x * x * x / 3.0 / s
                } else {
                    2.0 / PI * (x.sin() - x * x.cos()) / s
                }
            }
        }
    };
    let s_max = 200.0 * a;
    let width = (PI / (radius + cut)).min(a / 4.0);
    let panels = (s_max / width).ceil() as usize;
    let w = s_max / panels as f64;
    let (gx, gw) = gauss_legendre(8);
    let total: f64 = (0..panels)
        .into_par_iter()
        .map(|p| -> Result<f64> {
            let c = (p as f64 + 0.5) * w;
            let mut acc = 0.0;
            for (x, wt) in gx.iter().zip(&gw) {
                let s = c + 0.5 * w * x;
                acc += wt * khat(s)? * ball(s);
            }
            Ok(acc * 0.5 * w)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(total)
}
