//! Splitting `Z_t` at jump size `1/rho_t`: the shift `a_t`, the small-jump
//! exponent `psi_t`, the big-jump intensity `Lambda_t` and the compound
//! Poisson law `P_t` built from its convolution powers.
//!
//! With `R = 1/rho_t` the exponent splits as
//!
//! ```text
//! t psi(xi) = psi_t(xi) + t \int_{|u|>R} (1 - e^{i xi.u}) mu(du) + i xi.a_t
//! ```
//!
//! so `Z_t + a_t` has law `pbar_t * P_t`.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::levy_model::{BoundaryPolicy, LevyTriplet};
use crate::measure::FiniteMeasure;
use crate::process::Process;
use num_complex::Complex64;

/// `a_t = t (a + shift)` where the shift moves the compensator from radius
/// 1 to radius `1/rho`. For `rho <= 1` the shift is minus the first moment
/// of `1 <= |u| <= 1/rho`, which is what keeps the splitting identity exact.
pub fn shift_vector(triplet: &LevyTriplet, t: f64, rho: f64, policy: BoundaryPolicy) -> Result<Vec<f64>> {
    let s = triplet.measure.compensator_shift(1.0 / rho, policy)?;
    Ok(triplet.drift.iter().zip(s).map(|(a, b)| t * (a + b)).collect())
}

/// `psi_t(xi) = t \int_{|u| <= 1/rho} (1 - e^{i xi.u} + i xi.u) mu(du)`.
pub fn psi_t(triplet: &LevyTriplet, t: f64, rho: f64, xi: &[f64], policy: BoundaryPolicy) -> Result<Complex64> {
    Ok(t * triplet.measure.small_jump_exponent(xi, 1.0 / rho, policy)?)
}

/// `psi_t(i eta)`, real: `t \int_{|u| <= 1/rho} (1 - e^{-eta.u} - eta.u) mu(du)`.
pub fn psi_t_imaginary(triplet: &LevyTriplet, t: f64, rho: f64, eta: &[f64], policy: BoundaryPolicy) -> Result<f64> {
    Ok(t * triplet.measure.small_jump_exponent_imaginary(eta, 1.0 / rho, policy)?)
}

/// Default fraction of `Lambda_t` that may fall outside the grid.
pub const EPS_GRID: f64 = 0.1;

/// `Lambda_t = t mu` restricted to `|u| > 1/rho`, placed on `grid` up to
/// the inscribed radius. Fails when more than `eps_grid` of its mass lies
/// beyond.
pub fn truncated_intensity(
    triplet: &LevyTriplet,
    t: f64,
    rho: f64,
    grid: &GridSpec,
    policy: BoundaryPolicy,
    eps_grid: f64,
) -> Result<FiniteMeasure> {
    let m = &triplet.measure;
    let radius = 1.0 / rho;
    let cut = grid.extent;
    let total = t * m.annulus_mass(radius, f64::INFINITY, policy)?;
    let inside = t * m.annulus_mass(radius, cut, policy)?;
    let outside = (total - inside).max(0.0);
    if total > 0.0 && outside > eps_grid * total {
        // smallest doubling of the extent that would do
        let mut need = cut;
        while need < 1e300 && t * (m.annulus_mass(radius, f64::INFINITY, policy)? - m.annulus_mass(radius, need, policy)?) > eps_grid * total {
            need *= 2.0;
        }
        return Err(Error::GridCoverage {
            required_extent: need,
            captured_fraction: inside / total,
        });
    }
    if inside == 0.0 {
        let mut z = FiniteMeasure::zero(*grid);
        z.outside_mass = outside;
        return Ok(z);
    }
    let spectrum = if m.is_isotropic() && grid.dim > 1 {
        grid.eval_radial_spectrum(|s| {
            let mut xi = vec![0.0; grid.dim];
            xi[0] = s;
            Ok(t * m.big_jump_transform(&xi, radius, cut, policy)?)
        })?
    } else {
        grid.eval_spectrum(|xi| Ok(t * m.big_jump_transform(xi, radius, cut, policy)?))?
    };
    Ok(FiniteMeasure::from_spectrum(*grid, spectrum, outside))
}

/// Everything about the splitting at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionAt {
    pub t: f64,
    pub rho: f64,
    pub a_t: Vec<f64>,
    /// Exact `Lambda_t(R^n) = t mu(|u| > 1/rho)`.
    pub lambda_mass: f64,
}

pub fn decompose(process: &Process, t: f64) -> Result<DecompositionAt> {
    let rho = process.rho(t)?;
    Ok(DecompositionAt {
        t,
        rho,
        a_t: shift_vector(&process.triplet, t, rho, process.policy)?,
        lambda_mass: t * process.measure().annulus_mass(1.0 / rho, f64::INFINITY, process.policy)?,
    })
}

/// Smallest `M` with `sum_{m>M} lambda^m / m! < eps`, and that tail sum.
pub fn truncation_order(lambda: f64, eps: f64) -> (usize, f64) {
    if lambda == 0.0 {
        return (0, 0.0);
    }
    // terms t_m = lambda^m/m!; tail after M summed until negligible
    let tail_after = |m: usize| -> f64 {
        let mut term = (1..=m + 1).fold(1.0, |acc, k| acc * lambda / k as f64);
        let mut sum = 0.0f64;
        let mut k = m + 1;
        while term > 1e-30 * sum.max(1e-300) || k < m + 3 {
            sum += term;
            k += 1;
            term *= lambda / k as f64;
            if k > m + 2000 {
                break;
            }
        }
        sum
    };
    let mut m = 0;
    loop {
        let tail = tail_after(m);
        if tail < eps {
            return (m, tail);
        }
        m += 1;
    }
}

/// `[delta_0, Lambda, Lambda^{*2}, ..., Lambda^{*M}]`.
#[derive(Debug, Clone)]
pub struct CompoundSeries {
    pub terms: Vec<FiniteMeasure>,
    /// Total mass of `Lambda` including any part beyond the grid.
    pub lambda_mass: f64,
    pub order: usize,
    /// `sum_{m > M} lambda^m / m!`.
    pub tail_bound: f64,
}

pub fn compound_series(lambda: &FiniteMeasure, eps_tail: f64) -> Result<CompoundSeries> {
    let mass = lambda.total_mass();
    let (order, tail_bound) = truncation_order(mass, eps_tail);
    let mut terms = vec![FiniteMeasure::dirac(lambda.grid)];
    for _ in 0..order {
        let next = terms.last().unwrap().convolve(lambda)?;
        terms.push(next);
    }
    Ok(CompoundSeries {
        terms,
        lambda_mass: mass,
        order,
        tail_bound,
    })
}

/// `sum_{m <= M} w_m Lambda^{*m}` without keeping the powers.
pub fn weighted_power_sum(lambda: &FiniteMeasure, weights: &[f64]) -> Result<FiniteMeasure> {
    let mut acc = FiniteMeasure::dirac(lambda.grid).scaled(weights[0]);
    let mut power = FiniteMeasure::dirac(lambda.grid);
    for w in &weights[1..] {
        power = power.convolve(lambda)?;
        acc.add_assign(&power, *w)?;
    }
    Ok(acc)
}

/// `1/m!` for `m = 0..=order`.
pub fn inverse_factorials(order: usize) -> Vec<f64> {
    let mut w = vec![1.0; order + 1];
    for m in 1..=order {
        w[m] = w[m - 1] / m as f64;
    }
    w
}

#[derive(Debug, Clone)]
pub struct PoissonLaw {
    pub measure: FiniteMeasure,
    /// `1 - e^{-lambda} sum_{m <= M} lambda^m / m!`, the truncation loss.
    pub deficit: f64,
}

/// `P_t = e^{-lambda} sum_{m <= M} Lambda^{*m} / m!`.
pub fn poisson_law(series: &CompoundSeries) -> Result<PoissonLaw> {
    let e = (-series.lambda_mass).exp();
    let w = inverse_factorials(series.order);
    let mut acc = FiniteMeasure::zero(series.terms[0].grid);
    for (term, wm) in series.terms.iter().zip(&w) {
        acc.add_assign(term, e * wm)?;
    }
    let kept: f64 = w
        .iter()
        .enumerate()
        .map(|(m, wm)| wm * series.lambda_mass.powi(m as i32))
        .sum::<f64>()
        * e;
    Ok(PoissonLaw {
        measure: acc,
        deficit: 1.0 - kept,
    })
}

/// As [`poisson_law`] straight from `Lambda`, without storing the powers.
pub fn poisson_law_streaming(lambda: &FiniteMeasure, eps_tail: f64) -> Result<PoissonLaw> {
    let mass = lambda.total_mass();
    let (order, _) = truncation_order(mass, eps_tail);
    let e = (-mass).exp();
    let w: Vec<f64> = inverse_factorials(order).iter().map(|x| x * e).collect();
    let measure = weighted_power_sum(lambda, &w)?;
    let kept: f64 = w.iter().enumerate().map(|(m, wm)| wm * mass.powi(m as i32)).sum();
    Ok(PoissonLaw {
        measure,
        deficit: 1.0 - kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::LevyMeasureSpec;
    use approx::assert_relative_eq;

    #[test]
    fn truncation_table() {
        assert_eq!(truncation_order(0.0, 1e-10), (0, 0.0));
        for n in 1..=3 {
            let (m, tail) = truncation_order((n + 1) as f64, 1e-12);
            assert!(m <= 40, "{m}");
            assert!(tail < 1e-12);
            let (m1, _) = truncation_order((n + 1) as f64, 1e-12 * 1e6);
            assert!(m1 < m);
        }
    }

    #[test]
    fn one_sided_shift_closed_form() {
        // density u^{-1-a} on u > 0, a < 1: shift = \int_{1/rho}^1 u^{-a} du
        let a = 0.6;
        let m = LevyMeasureSpec::axis_stable(1, a, 1.0, 0.0, 0).unwrap();
        let tr = LevyTriplet::new(vec![0.3], m).unwrap();
        let (t, rho) = (0.01, 40.0);
        let v = shift_vector(&tr, t, rho, BoundaryPolicy::Exclude).unwrap();
        let exact = t * (0.3 + (1.0 - (1.0 / rho as f64).powf(1.0 - a)) / (1.0 - a));
        assert_relative_eq!(v[0], exact, max_relative = 1e-13);
    }

    #[test]
    fn atom_series_closed_form() {
        let g = GridSpec::new(1, 8.0, 256).unwrap();
        let h = g.spacing();
        let lam = FiniteMeasure::from_atoms(g, &[(vec![5.0 * h], 0.7)]).unwrap();
        let s = compound_series(&lam, 1e-10).unwrap();
        for (m, term) in s.terms.iter().enumerate() {
            let k = g.flatten(&[128 + 5 * m]);
            assert_relative_eq!(term.masses[k], 0.7f64.powi(m as i32), max_relative = 1e-10);
        }
        let p = poisson_law(&s).unwrap();
        assert!(p.deficit < 1e-10 && p.deficit >= 0.0);
        assert_relative_eq!(p.measure.total_mass(), 1.0 - p.deficit, max_relative = 1e-12);
    }
}
