use super::kernel::KernelField;
use super::NOISE_FLOOR;
use crate::decomposition::{decompose, truncated_intensity};
use crate::density::{argmax_lex, density_derivative, density_fourier, DensityGrid, Which};
use crate::error::{Error, Result};
use crate::exponent::{check_condition_a, log_space, ConditionAReport};
use crate::grid::GridSpec;
use crate::process::Process;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Window half-width in units of `1/rho_t`.
    pub window_radius: f64,
    /// Points per axis; `None` takes 4096, 256 or 64 by dimension.
    pub points: Option<usize>,
    /// Truncation of the compound series.
    pub eps_tail: f64,
    pub noise_floor: f64,
    /// Also compute first partial derivatives.
    pub gradient: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            window_radius: 20.0,
            points: None,
            eps_tail: 1e-10,
            noise_floor: NOISE_FLOOR,
            gradient: false,
        }
    }
}

impl SweepOptions {
    fn points(&self, n: usize) -> usize {
        self.points.unwrap_or(match n {
            1 => 4096,
            2 => 256,
            _ => 64,
        })
    }
}

/// Everything the fits need at one time.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub t: f64,
    pub rho: f64,
    pub a_t: Vec<f64>,
    /// `r_t`, the density of `Z_t + a_t`, on `[-W/rho, W/rho)^n`.
    pub density: DensityGrid,
    /// `x_t`: lexicographically first maximiser of `pbar_t` on the window.
    pub x_t: Vec<f64>,
    pub gradient: Vec<DensityGrid>,
    /// `sum_m Lambda_t^{*m}/m!` on the doubled window.
    pub field: KernelField,
    pub lambda_mass: f64,
}

impl SweepEntry {
    pub fn window(&self) -> &GridSpec {
        &self.density.grid
    }

    /// Node indices where the density is above the noise floor.
    pub(crate) fn mask(&self, floor: f64) -> Vec<usize> {
        let cut = floor * self.density.peak();
        (0..self.density.values.len())
            .filter(|&i| self.density.values[i] > cut)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub dim: usize,
    pub symmetric: bool,
    pub options: SweepOptions,
    pub condition_a: ConditionAReport,
    pub entries: Vec<SweepEntry>,
}

impl Sweep {
    /// Densities and kernel series at each `t`, ascending. Refuses models
    /// that fail condition A on radii covering the sweep.
    pub fn build(process: &Process, ts: &[f64], options: &SweepOptions) -> Result<Self> {
        let mut ts = ts.to_vec();
        if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidArgument("times must be positive and finite".into()));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let m = process.measure();
        if m.is_finite() {
            return Err(Error::FiniteMeasure);
        }
        let rhos: Vec<f64> = ts.iter().map(|&t| process.rho(t)).collect::<Result<_>>()?;
        let lo = rhos.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rhos.iter().cloned().fold(0.0, f64::max);
        let gate = check_condition_a(m, &process.sphere, &log_space(lo, 100.0 * hi, 9))?;
        if !gate.passed {
            return Err(Error::Refused(format!(
                "condition A fails at r = {:.3e}: psi_L vanishes along {:?}",
                gate.worst.r, gate.worst.direction_inf
            )));
        }
        let n = process.dim();
        let points = options.points(n);
        let mut entries = Vec::with_capacity(ts.len());
        for (&t, &rho) in ts.iter().zip(&rhos) {
            let window = GridSpec::new(n, options.window_radius / rho, points)?;
            let ext = window.widened(2)?;
            let dec = decompose(process, t)?;
            let lam = truncated_intensity(&process.triplet, t, rho, &ext, process.policy, 1.0)?;
            let field = KernelField::new(&lam, options.eps_tail)?;
            let density = density_fourier(process, t, &window, Which::Recentred)?;
            let bar = density_fourier(process, t, &window, Which::Bar)?;
            let gradient = if options.gradient {
                (0..n)
                    .map(|i| {
                        let mut o = vec![0; n];
                        o[i] = 1;
                        density_derivative(process, t, &window, Which::Recentred, &o)
                    })
                    .collect::<Result<_>>()?
            } else {
                Vec::new()
            };
            entries.push(SweepEntry {
                t,
                rho,
                a_t: dec.a_t,
                density,
                x_t: argmax_lex(&bar),
                gradient,
                field,
                lambda_mass: dec.lambda_mass,
            });
        }
        Ok(Sweep {
            dim: n,
            symmetric: m.is_symmetric(),
            options: options.clone(),
            condition_a: gate,
            entries,
        })
    }

    /// Same sweep on grids with twice the points per axis.
    pub fn refined(&self, process: &Process) -> Result<Self> {
        let mut o = self.options.clone();
        o.points = Some(2 * o.points(self.dim));
        let ts: Vec<f64> = self.entries.iter().map(|e| e.t).collect();
        Sweep::build(process, &ts, &o)
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.t).collect()
    }
}
