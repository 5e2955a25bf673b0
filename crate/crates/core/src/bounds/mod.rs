//! Kernel shapes, compound kernel estimates and the fits of their
//! constants against computed densities.
//!
//! Every bound is stated for `r_t`, the density of `Z_t + a_t` (see
//! [`Which::Recentred`](crate::density::Which::Recentred)).

mod bell;
mod domination;
mod fit;
mod kernel;
mod subexp;
mod sweep;

pub use bell::{
    bell_power_bound, bell_subexp_bound, bell_upper_ball_mass, compound_ball_mass, BellOptions, BellReport,
    BellRow, Precondition,
};
pub use domination::{convolution_domination_check, DominationReport};
pub use fit::{fit_derivative_upper, fit_lower, fit_upper, UpperFamily};
pub use kernel::{eval_compound_kernel, CompoundKernelParams, KernelField, KernelValue};
pub use subexp::{subexp_diagnostic, SubexpReport, TailDistribution};
pub use sweep::{Sweep, SweepEntry, SweepOptions};

use crate::error::{Error, Result};
use crate::quad::{adaptive, to_infinity, Tol};
use crate::special::{gamma, sphere_area};
use std::fmt;

/// `1 - G` for a radial `G`, as a function of the radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialTail {
    /// `1 ∧ r^{-alpha}`.
    Power { alpha: f64 },
    /// `e^{-lambda r}`.
    Exponential { lambda: f64 },
}

impl RadialTail {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            RadialTail::Power { alpha } => {
                if r <= 1.0 {
                    1.0
                } else {
                    r.powf(-alpha)
                }
            }
            RadialTail::Exponential { lambda } => (-lambda * r).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let p = match *self {
            RadialTail::Power { alpha } => alpha,
            RadialTail::Exponential { lambda } => lambda,
        };
        if p > 0.0 && p.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("tail parameter must be positive: {self:?}")))
        }
    }
}

/// Radial kernel shapes. Each is nonincreasing in the radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelShape {
    /// `b1 e^{-b2 r}`.
    ExpDecay { b1: f64, b2: f64 },
    /// `b1 e^{-b2 r ln(1 + r)}`, for symmetric processes.
    ExpLogDecay { b1: f64, b2: f64 },
    /// `b3 1{r <= b4}`.
    Indicator { b3: f64, b4: f64 },
    /// `c (1 + r)^{-exponent}`.
    PowerDecay { c: f64, exponent: f64 },
    /// `c (1 - G(r))`.
    TailFunction { c: f64, tail: RadialTail },
}

impl KernelShape {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: &[f64]| v.iter().all(|x| *x > 0.0 && x.is_finite());
        let good = match self {
            KernelShape::ExpDecay { b1, b2 } | KernelShape::ExpLogDecay { b1, b2 } => ok(&[*b1, *b2]),
            KernelShape::Indicator { b3, b4 } => ok(&[*b3, *b4]),
            KernelShape::PowerDecay { c, exponent } => ok(&[*c, *exponent]),
            KernelShape::TailFunction { c, tail } => {
                tail.validate()?;
                ok(&[*c])
            }
        };
        if good {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("kernel constants must be positive: {self:?}")))
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match *self {
            KernelShape::ExpDecay { b1, b2 } => b1 * (-b2 * r).exp(),
            KernelShape::ExpLogDecay { b1, b2 } => b1 * (-b2 * r * r.ln_1p()).exp(),
            KernelShape::Indicator { b3, b4 } => {
                if r <= b4 {
                    b3
                } else {
                    0.0
                }
            }
            KernelShape::PowerDecay { c, exponent } => c * (1.0 + r).powf(-exponent),
            KernelShape::TailFunction { c, tail } => c * tail.value(r),
        }
    }

    /// Value at the origin, which is the supremum.
    pub fn sup(&self) -> f64 {
        self.value(0.0)
    }

    /// Same shape with the leading constant replaced.
    pub fn with_scale(&self, s: f64) -> Self {
        match *self {
            KernelShape::ExpDecay { b2, .. } => KernelShape::ExpDecay { b1: s, b2 },
            KernelShape::ExpLogDecay { b2, .. } => KernelShape::ExpLogDecay { b1: s, b2 },
            KernelShape::Indicator { b4, .. } => KernelShape::Indicator { b3: s, b4 },
            KernelShape::PowerDecay { exponent, .. } => KernelShape::PowerDecay { c: s, exponent },
            KernelShape::TailFunction { tail, .. } => KernelShape::TailFunction { c: s, tail },
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            KernelShape::ExpDecay { b1, .. } | KernelShape::ExpLogDecay { b1, .. } => b1,
            KernelShape::Indicator { b3, .. } => b3,
            KernelShape::PowerDecay { c, .. } | KernelShape::TailFunction { c, .. } => c,
        }
    }

    /// `\int_{R^n} h(|x|) dx`; infinite when the shape is not integrable.
    pub fn integral(&self, n: usize) -> Result<f64> {
        let area = sphere_area(n);
        let nf = n as f64;
        Ok(match *self {
            KernelShape::ExpDecay { b1, b2 } => b1 * area * gamma(nf) / b2.powi(n as i32),
            KernelShape::ExpLogDecay { .. } => {
                let f = |r: f64| r.powi(n as i32 - 1) * self.value(r);
                let tol = Tol::new(1e-300, 1e-11);
                area * (adaptive(f, 0.0, 1.0, tol)?.value + to_infinity(f, 1.0, tol)?.value)
            }
            KernelShape::Indicator { b3, b4 } => b3 * area * b4.powi(n as i32) / nf,
            KernelShape::PowerDecay { c, exponent } => {
                if exponent <= nf {
                    f64::INFINITY
                } else {
                    // \int r^{n-1} (1+r)^{-e} dr = B(n, e - n)
                    c * area * gamma(nf) * gamma(exponent - nf) / gamma(exponent)
                }
            }
            KernelShape::TailFunction { c, tail } => match tail {
                RadialTail::Power { alpha } => {
                    if alpha <= nf {
                        f64::INFINITY
                    } else {
                        c * area * (1.0 / nf + 1.0 / (alpha - nf))
                    }
                }
                RadialTail::Exponential { lambda } => c * area * gamma(nf) / lambda.powi(n as i32),
            },
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            KernelShape::ExpDecay { .. } => "exp-decay",
            KernelShape::ExpLogDecay { .. } => "exp-log-decay",
            KernelShape::Indicator { .. } => "indicator",
            KernelShape::PowerDecay { .. } => "power-decay",
            KernelShape::TailFunction { .. } => "tail-function",
        }
    }

    /// `(name, value)` pairs of the constants, for reports.
    pub fn constants(&self) -> Vec<(&'static str, f64)> {
        match *self {
            KernelShape::ExpDecay { b1, b2 } | KernelShape::ExpLogDecay { b1, b2 } => vec![("b1", b1), ("b2", b2)],
            KernelShape::Indicator { b3, b4 } => vec![("b3", b3), ("b4", b4)],
            KernelShape::PowerDecay { c, exponent } => vec![("c", c), ("exponent", exponent)],
            KernelShape::TailFunction { c, .. } => vec![("c", c)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        })
    }
}

/// One row per time of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub t: f64,
    pub rho: f64,
    /// Upper: `max density / bound`. Lower: `min density / bound`.
    pub worst_ratio: f64,
    pub worst_point: Vec<f64>,
    /// Points where the bound fails by more than the tolerance.
    pub violations: usize,
    /// Centre of the lower bound; the origin for upper bounds.
    pub centre: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub direction: Direction,
    pub shape: KernelShape,
    /// Powers of `rho_t` in front of the kernel: `n`, or `n + 1` for first
    /// derivatives.
    pub sigma_power: usize,
    pub rows: Vec<BoundRow>,
    /// A pair of constants was found inside the search box.
    pub feasible: bool,
    pub verdict: bool,
    /// Upper: `1 - max ratio`. Lower: `min ratio - 1`.
    pub margin: f64,
    pub report_tol: f64,
    /// Largest truncation remainder of the compound series over the sweep.
    pub remainder: f64,
    pub witness: Option<String>,
}

impl BoundReport {
    fn finish(mut self) -> Self {
        let worst = match self.direction {
            Direction::Upper => self.rows.iter().map(|r| r.worst_ratio).fold(f64::NEG_INFINITY, f64::max),
            Direction::Lower => self.rows.iter().map(|r| r.worst_ratio).fold(f64::INFINITY, f64::min),
        };
        self.margin = match self.direction {
            Direction::Upper => 1.0 - worst,
            Direction::Lower => worst - 1.0,
        };
        let holds = match self.direction {
            Direction::Upper => worst <= 1.0 + self.report_tol,
            Direction::Lower => worst >= 1.0 - self.report_tol,
        };
        self.verdict = self.feasible && holds;
        if !self.verdict && self.witness.is_none() {
            let row = self
                .rows
                .iter()
                .find(|r| r.worst_ratio == worst)
                .or(self.rows.first());
            if let Some(r) = row {
                self.witness = Some(format!("t = {}, x = {:?}, ratio = {}", r.t, r.worst_point, r.worst_ratio));
            }
        }
        self
    }
}

/// Default tolerance of a post-fit verdict.
pub const REPORT_TOL: f64 = 1e-6;

/// Points with density below this fraction of the peak are ignored.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Splits samples `(radius, ratio)` at a tenth of the largest radius and
/// compares the outer decade with the inner part. Returns
/// `(upper_holds, lower_holds)`: the ratio is not growing by more than 2x,
/// and not falling below half.
pub(crate) fn decade_rule(samples: &[(f64, f64)]) -> (bool, bool) {
    let w = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let split = w / 10.0;
    let (mut in_sup, mut in_inf, mut out_sup, mut out_inf) =
        (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for &(r, q) in samples {
        if r <= split {
            in_sup = in_sup.max(q);
            in_inf = in_inf.min(q);
        } else {
            out_sup = out_sup.max(q);
            out_inf = out_inf.min(q);
        }
    }
    let upper = out_sup.is_finite() && in_sup.is_finite() && out_sup <= 2.0 * in_sup;
    let lower = out_inf > 0.0 && in_inf > 0.0 && out_inf >= 0.5 * in_inf;
    (upper, lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn integrals() {
        let e = KernelShape::ExpDecay { b1: 1.0, b2: 2.0 };
        assert_relative_eq!(e.integral(1).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(e.integral(2).unwrap(), 2.0 * std::f64::consts::PI / 4.0, max_relative = 1e-13);
        let p = KernelShape::PowerDecay { c: 1.0, exponent: 3.0 };
        // \int_R (1+|x|)^{-3} = 1
        assert_relative_eq!(p.integral(1).unwrap(), 1.0, max_relative = 1e-13);
        assert!(KernelShape::TailFunction {
            c: 1.0,
            tail: RadialTail::Power { alpha: 1.0 }
        }
        .integral(2)
        .unwrap()
        .is_infinite());
        let el = KernelShape::ExpLogDecay { b1: 1.0, b2: 1.0 };
        let tol = Tol::new(1e-300, 1e-12);
        let direct = 2.0 * (adaptive(|r| el.value(r), 0.0, 1.0, tol).unwrap().value
            + to_infinity(|r| el.value(r), 1.0, tol).unwrap().value);
        assert_relative_eq!(el.integral(1).unwrap(), direct, max_relative = 1e-10);
    }

    #[test]
    fn log_refinement_is_sharper_in_the_tail() {
        let a = KernelShape::ExpDecay { b1: 1.0, b2: 0.5 };
        let b = KernelShape::ExpLogDecay { b1: 1.0, b2: 0.5 };
        let q: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&r| b.value(r) / a.value(r)).collect();
        assert!(q[0] < 1.0 && q[1] < q[0] * 1e-10 && q[2] == 0.0);
    }

    #[test]
    fn decade_rule_cases() {
        let flat: Vec<(f64, f64)> = (1..=100).map(|i| (i as f64, 1.0)).collect();
        assert_eq!(decade_rule(&flat), (true, true));
        let growing: Vec<(f64, f64)> = (1..=100).map(|i| (i as f64, i as f64)).collect();
        assert_eq!(decade_rule(&growing), (false, true));
        let falling: Vec<(f64, f64)> = (1..=100).map(|i| (i as f64, 1.0 / i as f64)).collect();
        assert_eq!(decade_rule(&falling), (true, false));
    }

    proptest! {
        #[test]
        fn shapes_are_radially_nonincreasing(
            b1 in 0.01f64..100.0, b2 in 0.01f64..10.0, r1 in 0.0f64..50.0, dr in 0.0f64..50.0,
        ) {
            let shapes = [
                KernelShape::ExpDecay { b1, b2 },
                KernelShape::ExpLogDecay { b1, b2 },
                KernelShape::Indicator { b3: b1, b4: b2 },
                KernelShape::PowerDecay { c: b1, exponent: b2 },
                KernelShape::TailFunction { c: b1, tail: RadialTail::Power { alpha: b2 } },
            ];
            for s in shapes {
                prop_assert!(s.value(r1) >= s.value(r1 + dr));
                prop_assert!(s.value(r1) <= s.sup());
            }
        }
    }
}
