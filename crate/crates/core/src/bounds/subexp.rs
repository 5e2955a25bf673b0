//! Tail ratios `(1 - G^{*2}(x)) / (1 - G(x))` of one-dimensional laws on
//! `[0, inf)`.

use crate::error::{Error, Result};
use crate::quad::{adaptive, Tol};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailDistribution {
    /// `1 - G(x) = x^{-alpha}` for `x >= 1`.
    Pareto { alpha: f64 },
    /// `1 - G(x) = e^{-lambda x}`.
    Exponential { lambda: f64 },
}

impl TailDistribution {
    /// Left end of the support.
    fn start(&self) -> f64 {
        match self {
            TailDistribution::Pareto { .. } => 1.0,
            TailDistribution::Exponential { .. } => 0.0,
        }
    }

    pub fn tail(&self, x: f64) -> f64 {
        match *self {
            TailDistribution::Pareto { alpha } => {
                if x < 1.0 {
                    1.0
                } else {
                    x.powf(-alpha)
                }
            }
            TailDistribution::Exponential { lambda } => {
                if x < 0.0 {
                    1.0
                } else {
                    (-lambda * x).exp()
                }
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            TailDistribution::Pareto { alpha } => {
                if x < 1.0 {
                    0.0
                } else {
                    alpha * x.powf(-alpha - 1.0)
                }
            }
            TailDistribution::Exponential { lambda } => {
                if x < 0.0 {
                    0.0
                } else {
                    lambda * (-lambda * x).exp()
                }
            }
        }
    }

    /// `1 - G^{*2}(x) = T(x) + \int_0^x T(x - y) g(y) dy`.
    pub fn convolution_tail(&self, x: f64) -> Result<f64> {
        let s = self.start();
        let mut total = self.tail(x);
        if x <= s {
            return Ok(total);
        }
        // where x - y < s the tail is 1: that piece is G(x) - G(max(s, x - s))
        let knee = (x - s).max(s);
        total += self.tail(knee) - self.tail(x);
        if x - s > s {
            let f = |y: f64| self.tail(x - y) * self.density(y);
            let mid = 0.5 * x;
            total += geometric(&f, s, mid, false)?;
            total += geometric(&f, mid, x - s, true)?;
        }
        Ok(total)
    }
}

/// `\int_a^b f` on panels doubling away from `a` (or from `b` when
/// `from_right`), where integrands of power type are steepest.
fn geometric(f: &dyn Fn(f64) -> f64, a: f64, b: f64, from_right: bool) -> Result<f64> {
    let tol = Tol::new(1e-300, 1e-12);
    let len = b - a;
    if len <= 0.0 {
        return Ok(0.0);
    }
    let mut edges = vec![0.0];
    let mut w = (len * 1e-6).max(1e-3f64.min(len));
    while w < len {
        edges.push(w);
        w *= 2.0;
    }
    edges.push(len);
    let mut total = 0.0;
    for p in edges.windows(2) {
        let (lo, hi) = if from_right { (b - p[1], b - p[0]) } else { (a + p[0], a + p[1]) };
        total += adaptive(f, lo, hi, tol)?.value;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubexpReport {
    /// `(x, ratio)` in increasing `x`.
    pub rows: Vec<(f64, f64)>,
    pub target: f64,
    pub trend_tol: f64,
    /// Ratios approach `target` and end within `trend_tol` of it.
    pub verdict: bool,
}

impl SubexpReport {
    pub fn last_ratio(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.1)
    }
}

/// Ratio table at increasing arguments, with the verdict "consistent with
/// a limit of `target`". The defining limit of the sub-exponential class
/// is taken as a parameter.
pub fn subexp_diagnostic(g: &TailDistribution, xs: &[f64], target: f64, trend_tol: f64) -> Result<SubexpReport> {
    if xs.is_empty() || xs.windows(2).any(|w| w[1] <= w[0]) || xs[0] <= 0.0 {
        return Err(Error::InvalidArgument("arguments must be positive and increasing".into()));
    }
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        let t = g.tail(x);
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Refused(format!("tail at {x} is {t}, not in (0, 1]")));
        }
        rows.push((x, g.convolution_tail(x)? / t));
    }
    let first = (rows[0].1 - target).abs();
    let last = (rows[rows.len() - 1].1 - target).abs();
    Ok(SubexpReport {
        verdict: last <= trend_tol && last <= first,
        rows,
        target,
        trend_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_closed_form() {
        let g = TailDistribution::Exponential { lambda: 0.7 };
        for x in [0.5, 3.0, 20.0] {
            let exact = (-0.7 * x as f64).exp() * (1.0 + 0.7 * x);
            assert_relative_eq!(g.convolution_tail(x).unwrap(), exact, max_relative = 1e-10);
        }
        let r = subexp_diagnostic(&g, &[1.0, 10.0, 30.0], 1.0, 0.02).unwrap();
        assert!(!r.verdict && r.last_ratio() > 10.0);
    }

    #[test]
    fn pareto_tends_to_two() {
        let g = TailDistribution::Pareto { alpha: 1.5 };
        let r = subexp_diagnostic(&g, &[10.0, 100.0, 1e3, 1e4, 1e5], 2.0, 0.02).unwrap();
        assert!(r.verdict, "{:?}", r.rows);
        // the literal limit 1 is missed by a factor 2
        assert!(!subexp_diagnostic(&g, &[10.0, 1e5], 1.0, 0.02).unwrap().verdict);
    }

    #[test]
    fn pareto_small_arguments() {
        let g = TailDistribution::Pareto { alpha: 2.0 };
        // P(X1 + X2 > 1.5) = 1
        assert_relative_eq!(g.convolution_tail(1.5).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_input_refused() {
        let g = TailDistribution::Exponential { lambda: 1e6 };
        assert!(matches!(subexp_diagnostic(&g, &[1.0], 1.0, 0.02), Err(Error::Refused(_))));
        assert!(subexp_diagnostic(&g, &[2.0, 1.0], 1.0, 0.02).is_err());
    }
}
