//! Transition densities on grids by Fourier inversion, and independently
//! by the convolution `pbar_t * P_t`.
//!
//! Three inversion routes share one description of the characteristic
//! function:
//!
//! * `Direct` (n = 1): composite Gauss-Legendre quadrature of
//!   `(1/pi) Re \int_0^S F(s) e^{-isx} ds` at every node. No periodisation,
//!   so heavy tails do not alias back into the window.
//! * `Radial` (isotropic, n >= 2): the same for the radial inversion
//!   integral `(2 pi)^{-n} omega_n \int F(s) phi_n(rs) s^{n-1} ds`, tabulated
//!   in `r` and interpolated onto the grid.
//! * `Fft`: the centred discrete transform of [`GridSpec`], optionally on a
//!   wider period that is cropped afterwards.
//!
//! Measures with atoms (shells) make `F` ripple at the atom radii. Jumps far
//! beyond the window only remove mass from it, so those atoms are folded
//! into a constant factor `e^{-t mu(|u| > R_far)}` with `R_far` a multiple of
//! the window.

use crate::decomposition::{decompose, poisson_law_streaming, truncated_intensity};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::levy_model::{norm, LevyMeasureSpec};
use crate::measure::FiniteMeasure;
use crate::process::Process;
use crate::quad::gauss_legendre;
use crate::special::{bessel_j0, bessel_j1, sphere_area};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

/// Which law is inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// `p_t`, the law of `Z_t`.
    Full,
    /// Law of `Z_t + a_t`, i.e. `pbar_t * P_t`; `p_t(x) = r_t(x + a_t)`.
    Recentred,
    /// `pbar_t`, the small-jump part alone.
    Bar,
}

impl Which {
    fn code(self) -> u32 {
        match self {
            Which::Full => 0,
            Which::Recentred => 1,
            Which::Bar => 2,
        }
    }
    fn from_code(c: u32) -> Result<Self> {
        Ok(match c {
            0 => Which::Full,
            1 => Which::Recentred,
            2 => Which::Bar,
            _ => return Err(Error::Io(format!("unknown density kind {c}"))),
        })
    }
    pub fn name(self) -> &'static str {
        match self {
            Which::Full => "full",
            Which::Recentred => "recentred",
            Which::Bar => "bar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Auto,
    Direct,
    Fft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOptions {
    pub method: Method,
    /// `|F| * |xi|^{N}` must fall below this at the frequency cutoff.
    pub eps_decay: f64,
    /// FFT only: period is this many windows.
    pub period_factor: usize,
    /// Atoms beyond `far_factor * R * sqrt(n)` only remove mass.
    pub far_factor: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            method: Method::Auto,
            eps_decay: 1e-14,
            period_factor: 1,
            far_factor: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub t: f64,
    pub which: Which,
    /// Derivative orders per axis; all zero for the density itself.
    pub orders: Vec<usize>,
}

impl DensityGrid {
    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn riemann_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Value at the node nearest to `x`.
    pub fn at(&self, x: &[f64]) -> f64 {
        let h = self.grid.spacing();
        let ix: Vec<usize> = x
            .iter()
            .map(|&c| (((c + self.grid.extent) / h).round().max(0.0) as usize).min(self.grid.points - 1))
            .collect();
        self.values[self.grid.flatten(&ix)]
    }

    pub fn is_derivative(&self) -> bool {
        self.orders.iter().any(|&k| k > 0)
    }

    /// Binary layout, little endian: `b"LVDG"`, `u32` version (1), `u32`
    /// dim, `u32` points, `f64` extent, `f64` t, `u32` kind (0 full,
    /// 1 recentred, 2 bar), `u32 x 3` orders (unused axes 0), then
    /// `points^dim` `f64` values in row-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"LVDG")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(self.grid.dim as u32).to_le_bytes())?;
        w.write_all(&(self.grid.points as u32).to_le_bytes())?;
        w.write_all(&self.grid.extent.to_le_bytes())?;
        w.write_all(&self.t.to_le_bytes())?;
        w.write_all(&self.which.code().to_le_bytes())?;
        for d in 0..3 {
            let k = self.orders.get(d).copied().unwrap_or(0) as u32;
            w.write_all(&k.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"LVDG" {
            return Err(Error::Io("not a density grid file".into()));
        }
        let u32_ = |r: &mut R| -> Result<u32> {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            Ok(u32::from_le_bytes(b))
        };
        let f64_ = |r: &mut R| -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let version = u32_(&mut r)?;
        if version != 1 {
            return Err(Error::Io(format!("unsupported grid file version {version}")));
        }
        let dim = u32_(&mut r)? as usize;
        let points = u32_(&mut r)? as usize;
        let extent = f64_(&mut r)?;
        let t = f64_(&mut r)?;
        let which = Which::from_code(u32_(&mut r)?)?;
        let mut orders = Vec::new();
        for d in 0..3 {
            let k = u32_(&mut r)? as usize;
            if d < dim {
                orders.push(k);
            }
        }
        let grid = GridSpec::new(dim, extent, points)?;
        let mut bytes = vec![0u8; grid.len() * 8];
        r.read_exact(&mut bytes)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(DensityGrid {
            grid,
            values,
            t,
            which,
            orders,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_binary(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_binary(std::io::BufReader::new(f))
    }
}

/// `F(xi) = F0(xi) e^{-i xi.b}`, i.e. the density is `p0(x + b)`.
struct Spectral<'a> {
    process: &'a Process,
    t: f64,
    rho: f64,
    which: Which,
    /// Atoms beyond this radius are folded into `far_mass`.
    far_radius: Option<f64>,
    far_mass: f64,
    b: Vec<f64>,
    /// Largest radius at which `F0` oscillates.
    ripple: f64,
}

impl<'a> Spectral<'a> {
    fn new(process: &'a Process, t: f64, which: Which, window: &GridSpec, opts: &DensityOptions) -> Result<Self> {
        let m = process.measure();
        if m.is_finite() {
            return Err(Error::FiniteMeasure);
        }
        let n = process.dim();
        let dec = decompose(process, t)?;
        let rho = dec.rho;
        let policy = process.policy;
        let drift: Vec<f64> = process.triplet.drift.iter().map(|a| t * a).collect();
        let atomic = matches!(m, LevyMeasureSpec::DiscretizedStable { .. });
        let span = window.extent * (n as f64).sqrt();
        let (far_radius, far_mass, mut b, ripple) = match which {
            Which::Bar => (None, 0.0, vec![0.0; n], if atomic { 1.0 / rho } else { 0.0 }),
            _ if atomic => {
                let rf = (opts.far_factor * span).max(1.0 / rho);
                let shift = m.compensator_shift(rf, policy)?;
                let b: Vec<f64> = process
                    .triplet
                    .drift
                    .iter()
                    .zip(shift)
                    .map(|(a, s)| t * (a + s))
                    .collect();
                let far = t * m.annulus_mass(rf, f64::INFINITY, policy)?;
                (Some(rf), far, b, rf)
            }
            _ => (None, 0.0, drift, 0.0),
        };
        if which == Which::Recentred {
            for (bi, ai) in b.iter_mut().zip(&dec.a_t) {
                *bi -= ai;
            }
        }
        Ok(Spectral {
            process,
            t,
            rho,
            which,
            far_radius,
            far_mass,
            b,
            ripple,
        })
    }

    /// Exponent of `F0`: `F0 = exp(-e)`.
    fn exponent(&self, xi: &[f64]) -> Result<Complex64> {
        let m = self.process.measure();
        let p = self.process.policy;
        Ok(match (self.which, self.far_radius) {
            (Which::Bar, _) => self.t * m.small_jump_exponent(xi, 1.0 / self.rho, p)?,
            (_, Some(rf)) => self.t * m.small_jump_exponent(xi, rf, p)? + self.far_mass,
            _ => self.t * m.psi_jump(xi)?,
        })
    }

    fn f0(&self, xi: &[f64]) -> Result<Complex64> {
        Ok((-self.exponent(xi)?).exp())
    }

    fn full(&self, xi: &[f64]) -> Result<Complex64> {
        let ph: f64 = xi.iter().zip(&self.b).map(|(a, b)| a * b).sum();
        Ok(self.f0(xi)? * Complex64::from_polar(1.0, -ph))
    }

    /// Smallest `s` (by doubling from `rho`) at which
    /// `|F0(s l)| s^{extra}` is below `eps` for every direction, checked at
    /// `s` and `2s`.
    fn cutoff(&self, directions: &[Vec<f64>], extra: f64, eps: f64) -> Result<f64> {
        let ok = |s: f64| -> Result<bool> {
            for l in directions {
                let xi: Vec<f64> = l.iter().map(|c| c * s).collect();
                let e = self.exponent(&xi)?.re - extra * (s / self.rho).max(1.0).ln();
                if e < -eps.ln() {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let mut s = self.rho;
        for _ in 0..200 {
            if ok(s)? && ok(2.0 * s)? {
                return Ok(s);
            }
            s *= 1.5;
        }
        Err(Error::InsufficientDecay {
            boundary_magnitude: f64::NAN,
        })
    }
}

/// Default window: `[-20/rho_t, 20/rho_t]^n` with 4096, 1024 or 128 points
/// per axis.
pub fn default_grid(process: &Process, t: f64) -> Result<GridSpec> {
    if process.measure().is_finite() {
        return Err(Error::FiniteMeasure);
    }
    let rho = process.rho(t)?;
    let n = process.dim();
    let points = match n {
        1 => 4096,
        2 => 1024,
        _ => 128,
    };
    GridSpec::new(n, 20.0 / rho, points)
}

pub fn density_fourier(process: &Process, t: f64, grid: &GridSpec, which: Which) -> Result<DensityGrid> {
    density_fourier_with(process, t, grid, which, &vec![0; grid.dim], &DensityOptions::default())
}

pub fn density_derivative(
    process: &Process,
    t: f64,
    grid: &GridSpec,
    which: Which,
    orders: &[usize],
) -> Result<DensityGrid> {
    density_fourier_with(process, t, grid, which, orders, &DensityOptions::default())
}

pub fn density_fourier_with(
    process: &Process,
    t: f64,
    grid: &GridSpec,
    which: Which,
    orders: &[usize],
    opts: &DensityOptions,
) -> Result<DensityGrid> {
    let n = process.dim();
    if grid.dim != n || orders.len() != n {
        return Err(Error::GridMismatch(format!(
            "grid dimension {}, orders {}, model dimension {n}",
            grid.dim,
            orders.len()
        )));
    }
    let spec = Spectral::new(process, t, which, grid, opts)?;
    let total: usize = orders.iter().sum();
    let radial_ok = n >= 2 && process.measure().is_isotropic() && total <= 1;
    let method = match opts.method {
        Method::Auto if n == 1 => Method::Direct,
        Method::Auto if radial_ok => Method::Direct,
        Method::Auto => Method::Fft,
        Method::Direct if n >= 2 && !radial_ok => {
            return Err(Error::InvalidArgument(
                "direct inversion in n >= 2 needs an isotropic measure and order <= 1".into(),
            ))
        }
        m => m,
    };
    let values = match method {
        Method::Direct if n == 1 => direct_1d(&spec, grid, orders[0], opts)?,
        Method::Direct => radial(&spec, grid, orders, opts)?,
        _ => fft(&spec, grid, orders, opts)?,
    };
    Ok(DensityGrid {
        grid: *grid,
        values,
        t,
        which,
        orders: orders.to_vec(),
    })
}

/// Nodes and weights of a composite 20-point Gauss-Legendre rule on
/// `[0, s_max]`, geometrically graded towards 0.
fn composite_rule(s_max: f64, width: f64) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(20);
    let panels = (s_max / width).ceil().max(1.0) as usize;
    let w = s_max / panels as f64;
    // first panel split geometrically: F may have a cusp at 0
    let mut edges: Vec<f64> = (0..16).rev().map(|j| w * 0.5f64.powi(j + 1)).collect();
    edges.insert(0, 0.0);
    edges.extend((1..=panels).map(|k| k as f64 * w));
    let mut xs = Vec::with_capacity(edges.len() * 20);
    let mut ws = Vec::with_capacity(edges.len() * 20);
    for p in edges.windows(2) {
        let (a, b) = (p[0], p[1]);
        if b <= a {
            continue;
        }
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in gx.iter().zip(&gw) {
            xs.push(c + h * x);
            ws.push(h * wt);
        }
    }
    (xs, ws)
}

fn direct_1d(spec: &Spectral, grid: &GridSpec, order: usize, opts: &DensityOptions) -> Result<Vec<f64>> {
    let x_max = grid.extent + spec.b[0].abs();
    let s_max = spec.cutoff(&[vec![1.0], vec![-1.0]], order as f64, opts.eps_decay)?;
    let width = (2.0 * PI / (x_max + spec.ripple)).min(s_max / 64.0);
    let (nodes, weights) = composite_rule(s_max, width);
    let vals: Vec<Complex64> = nodes
        .par_iter()
        .zip(&weights)
        .map(|(&s, &w)| {
            let mult = Complex64::new(0.0, -s).powu(order as u32);
            Ok(spec.f0(&[s])? * mult * w)
        })
        .collect::<Result<_>>()?;
    let b = spec.b[0];
    Ok((0..grid.points)
        .into_par_iter()
        .map(|j| {
            let x = grid.coord(j) + b;
            let mut acc = 0.0;
            for (s, v) in nodes.iter().zip(&vals) {
                let (sn, cs) = (s * x).sin_cos();
                // Re[v e^{-isx}]
                acc += v.re * cs + v.im * sn;
            }
            acc / PI
        })
        .collect())
}

/// `d/dv phi_n(v)`.
fn phi_prime(n: usize, v: f64) -> f64 {
    match n {
        2 => -bessel_j1(v),
        _ => {
            if v.abs() < 1e-3 {
                -v / 3.0 + v * v * v / 30.0
            } else {
                (v * v.cos() - v.sin()) / (v * v)
            }
        }
    }
}

fn phi_n(n: usize, v: f64) -> f64 {
    match n {
        2 => bessel_j0(v),
        _ => crate::special::phi(3, v),
    }
}

fn radial(spec: &Spectral, grid: &GridSpec, orders: &[usize], opts: &DensityOptions) -> Result<Vec<f64>> {
    let n = grid.dim;
    let deriv = orders.iter().position(|&k| k == 1);
    let dr = grid.spacing() / 8.0;
    let r_max = grid.extent * (n as f64).sqrt() + norm(&spec.b) + 4.0 * dr;
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let extra = (n - 1 + deriv.is_some() as usize) as f64;
    let s_max = spec.cutoff(&[e1], extra, opts.eps_decay)?;
    let width = (2.0 * PI / (r_max + spec.ripple)).min(s_max / 64.0);
    let (nodes, weights) = composite_rule(s_max, width);
    let pref = sphere_area(n) / (2.0 * PI).powi(n as i32);
    let vals: Vec<f64> = nodes
        .par_iter()
        .zip(&weights)
        .map(|(&s, &w)| {
            let mut xi = vec![0.0; n];
            xi[0] = s;
            let f = spec.f0(&xi)?.re;
            let jac = s.powi(n as i32 - 1) * if deriv.is_some() { s } else { 1.0 };
            Ok(f * jac * w * pref)
        })
        .collect::<Result<_>>()?;
    let count = (r_max / dr).ceil() as usize + 3;
    let table: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|j| {
            let r = j as f64 * dr;
            nodes
                .iter()
                .zip(&vals)
                .map(|(s, v)| {
                    v * if deriv.is_some() {
                        phi_prime(n, r * s)
                    } else {
                        phi_n(n, r * s)
                    }
                })
                .sum()
        })
        .collect();
    // even table for the density, odd for its radial derivative
    let parity = if deriv.is_some() { -1.0 } else { 1.0 };
    let lookup = |r: f64| -> f64 {
        let u = r / dr;
        let j = u.floor() as isize;
        let f = u - j as f64;
        let at = |k: isize| -> f64 {
            if k < 0 {
                parity * table[(-k) as usize]
            } else {
                table[(k as usize).min(count - 1)]
            }
        };
        let (p0, p1, p2, p3) = (at(j - 1), at(j), at(j + 1), at(j + 2));
        // cubic Lagrange through j-1..j+2
        -f * (f - 1.0) * (f - 2.0) / 6.0 * p0 + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * p1
            - (f + 1.0) * f * (f - 2.0) / 2.0 * p2
            + (f + 1.0) * f * (f - 1.0) / 6.0 * p3
    };
    let b = &spec.b;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x: Vec<f64> = grid.point(i).iter().zip(b).map(|(x, b)| x + b).collect();
            let r = norm(&x);
            match deriv {
                None => lookup(r),
                Some(d) => {
                    if r == 0.0 {
                        0.0
                    } else {
                        lookup(r) * x[d] / r
                    }
                }
            }
        })
        .collect())
}

fn fft(spec: &Spectral, grid: &GridSpec, orders: &[usize], opts: &DensityOptions) -> Result<Vec<f64>> {
    let wide = grid.widened(opts.period_factor.max(1))?;
    let total: i32 = orders.iter().sum::<usize>() as i32;
    // decay precondition at the Nyquist frequency, every direction
    let nyq = wide.nyquist();
    let mut worst = 0.0f64;
    for l in spec.process.sphere.iter() {
        let xi: Vec<f64> = l.iter().map(|c| c * nyq).collect();
        worst = worst.max(spec.f0(&xi)?.norm() * (nyq / spec.rho).max(1.0).powi(total));
    }
    if worst > opts.eps_decay {
        return Err(Error::InsufficientDecay {
            boundary_magnitude: worst,
        });
    }
    let spectrum = wide.eval_spectrum(|xi| {
        let mut v = spec.full(xi)?;
        for (d, &k) in orders.iter().enumerate() {
            v *= Complex64::new(0.0, -xi[d]).powu(k as u32);
        }
        Ok(v)
    })?;
    let vol = wide.cell_volume();
    let vals: Vec<f64> = wide.to_spatial(spectrum).into_iter().map(|z| z.re / vol).collect();
    Ok(crop_by(grid, &wide, &vals))
}

/// Central window `grid` of values on the concentric, equally spaced `wide`.
fn crop_by(grid: &GridSpec, wide: &GridSpec, vals: &[f64]) -> Vec<f64> {
    let off = (wide.points - grid.points) / 2;
    (0..grid.len())
        .map(|i| {
            let ix = grid.unflatten(i);
            let mut jx = [0usize; 3];
            for d in 0..grid.dim {
                jx[d] = ix[d] + off;
            }
            vals[wide.flatten(&jx)]
        })
        .collect()
}

/// `(bar * P)(x + shift)` on the shared grid (circular), the translation
/// applied as a frequency-domain phase so it is exact off-grid.
pub fn density_convolution(bar: &DensityGrid, plaw: &FiniteMeasure, shift: &[f64]) -> Result<DensityGrid> {
    if !bar.grid.same_nodes(&plaw.grid) {
        return Err(Error::GridMismatch("density and measure grids differ".into()));
    }
    let g = bar.grid;
    let a = g.real_to_spectral(&bar.values);
    let b = g.real_to_spectral(&plaw.masses);
    let freqs: Vec<Vec<f64>> = (0..g.len()).map(|k| g.frequency(k)).collect();
    let prod: Vec<Complex64> = a
        .par_iter()
        .zip(&b)
        .zip(&freqs)
        .map(|((x, y), xi)| {
            let ph: f64 = xi.iter().zip(shift).map(|(a, b)| a * b).sum();
            // the Nyquist plane has no sign; keep the shift real there
            let nyq = xi.iter().any(|&c| (c + g.nyquist()).abs() < 1e-9 * g.nyquist());
            let rot = if nyq {
                Complex64::new(ph.cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -ph)
            };
            x * y * rot
        })
        .collect();
    let values = g.to_spatial(prod).into_iter().map(|z| z.re).collect();
    Ok(DensityGrid {
        grid: g,
        values,
        t: bar.t,
        which: Which::Full,
        orders: bar.orders.clone(),
    })
}

/// Diagnostics of the convolution route.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionRoute {
    pub lambda_grid_mass: f64,
    pub lambda_outside_mass: f64,
    pub poisson_deficit: f64,
}

/// `p_t` on `window` via `pbar_t * P_t` translated by `a_t`, computed on a
/// grid twice as wide and cropped.
pub fn density_by_decomposition(process: &Process, t: f64, window: &GridSpec) -> Result<(DensityGrid, ConvolutionRoute)> {
    let ext = window.widened(2)?;
    let dec = decompose(process, t)?;
    let lam = truncated_intensity(&process.triplet, t, dec.rho, &ext, process.policy, 1.0)?;
    let plaw = poisson_law_streaming(&lam, 1e-12)?;
    let bar = density_fourier(process, t, &ext, Which::Bar)?;
    let full = density_convolution(&bar, &plaw.measure, &dec.a_t)?;
    let values = crop_by(window, &ext, &full.values);
    Ok((
        DensityGrid {
            grid: *window,
            values,
            t,
            which: Which::Full,
            orders: vec![0; window.dim],
        },
        ConvolutionRoute {
            lambda_grid_mass: lam.grid_mass(),
            lambda_outside_mass: lam.outside_mass,
            poisson_deficit: plaw.deficit,
        },
    ))
}

/// Lexicographically first node of maximal value.
pub fn argmax_lex(d: &DensityGrid) -> Vec<f64> {
    let mut best = 0;
    for (i, v) in d.values.iter().enumerate() {
        if *v > d.values[best] {
            best = i;
        }
    }
    d.grid.point(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::{LevyMeasureSpec, LevyTriplet};
    use approx::assert_relative_eq;

    fn cauchy(n: usize) -> Process {
        let c = match n {
            1 => 1.0 / PI,
            _ => 1.0 / (2.0 * PI),
        };
        // |xi| exponent: c A_{n,1} C_1 = 1 with C_1 = pi/2
        let m = LevyMeasureSpec::isotropic_stable(n, 1.0, c).unwrap();
        Process::new(LevyTriplet::driftless(m).unwrap())
    }

    #[test]
    fn cauchy_1d_direct_and_fft() {
        let p = cauchy(1);
        let t = 0.1;
        let g = GridSpec::new(1, 2.0, 512).unwrap();
        let d = density_fourier(&p, t, &g, Which::Full).unwrap();
        for j in (0..512).step_by(37) {
            let x = g.coord(j);
            assert_relative_eq!(d.values[j], t / (PI * (t * t + x * x)), max_relative = 1e-8);
        }
        let dd = density_derivative(&p, 1.0, &GridSpec::new(1, 4.0, 64).unwrap(), Which::Full, &[1]).unwrap();
        assert_relative_eq!(dd.at(&[1.0]), -1.0 / (2.0 * PI), max_relative = 1e-8);
        // the bar density decays fast, so the plain transform works
        let opts = DensityOptions {
            method: Method::Fft,
            ..Default::default()
        };
        let a = density_fourier_with(&p, t, &g, Which::Bar, &[0], &opts).unwrap();
        let b = density_fourier(&p, t, &g, Which::Bar).unwrap();
        let peak = b.peak();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-9 * peak);
        }
    }

    #[test]
    fn cauchy_2d_radial() {
        let p = cauchy(2);
        let t = 1.0;
        let g = GridSpec::new(2, 8.0, 64).unwrap();
        let d = density_fourier(&p, t, &g, Which::Full).unwrap();
        assert_relative_eq!(d.at(&[0.0, 0.0]), 1.0 / (2.0 * PI), max_relative = 1e-8);
        for i in (0..g.len()).step_by(97) {
            let x = g.point(i);
            let r2 = x[0] * x[0] + x[1] * x[1];
            let exact = t / (2.0 * PI) * (t * t + r2).powf(-1.5);
            // cubic interpolation of the radial table
            assert_relative_eq!(d.values[i], exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn binary_round_trip() {
        let g = GridSpec::new(2, 1.5, 8).unwrap();
        let d = DensityGrid {
            grid: g,
            values: (0..64).map(|i| i as f64 * 0.1 - 2.0).collect(),
            t: 0.25,
            which: Which::Recentred,
            orders: vec![1, 0],
        };
        let mut buf = Vec::new();
        d.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 * 3 + 16 + 4 * 4 + 64 * 8);
        assert_eq!(DensityGrid::read_binary(&buf[..]).unwrap(), d);
    }

    #[test]
    fn atoms_refused() {
        use crate::levy_model::Atom;
        let m = LevyMeasureSpec::TabulatedAtoms {
            dim: 1,
            atoms: vec![Atom {
                position: vec![1.0],
                weight: 1.0,
            }],
        };
        let p = Process::new(LevyTriplet::driftless(m).unwrap());
        let g = GridSpec::new(1, 1.0, 16).unwrap();
        assert_eq!(density_fourier(&p, 0.1, &g, Which::Full), Err(Error::FiniteMeasure));
    }
}
