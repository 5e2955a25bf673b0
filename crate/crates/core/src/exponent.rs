//! Characteristic exponent, its quadratic comparison functions `psi_L` and
//! `psi_U`, the radial envelope `psi_star`, the comparability condition
//! between them and the scale `rho_t` solving `t psi_star(rho_t) = 1`.

use crate::error::{Error, Result};
use crate::levy_model::{norm, LevyMeasureSpec, LevyTriplet};
use crate::sphere::SphereGrid;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Mutex;

/// `1 - cos 1`, the constant in `(1 - cos 1) psi_L <= Re psi`.
pub const ONE_MINUS_COS_ONE: f64 = 0.459_697_694_131_860_3;

pub fn psi(triplet: &LevyTriplet, xi: &[f64]) -> Result<Complex64> {
    triplet.psi(xi)
}

pub fn psi_lower(measure: &LevyMeasureSpec, xi: &[f64]) -> Result<f64> {
    measure.psi_lower(xi)
}

pub fn psi_upper(measure: &LevyMeasureSpec, xi: &[f64]) -> Result<f64> {
    measure.psi_upper(xi)
}

fn scaled(l: &[f64], r: f64) -> Vec<f64> {
    l.iter().map(|x| x * r).collect()
}

/// `psi_star(r) = sup_{|l|=1} psi_U(r l)` over the direction grid, with the
/// maximising direction.
pub fn psi_star_with_direction(measure: &LevyMeasureSpec, r: f64, sphere: &SphereGrid) -> Result<(f64, Vec<f64>)> {
    if measure.is_isotropic() {
        let l = sphere.point(0);
        return Ok((measure.psi_upper(&scaled(l, r))?, l.to_vec()));
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for l in sphere.iter() {
        let v = measure.psi_upper(&scaled(l, r))?;
        if v > best.0 {
            best = (v, l.to_vec());
        }
    }
    Ok(best)
}

pub fn psi_star(measure: &LevyMeasureSpec, r: f64, sphere: &SphereGrid) -> Result<f64> {
    Ok(psi_star_with_direction(measure, r, sphere)?.0)
}

/// `inf_{|l|=1} psi_L(r l)` over the direction grid, with the minimiser.
pub fn psi_lower_inf(measure: &LevyMeasureSpec, r: f64, sphere: &SphereGrid) -> Result<(f64, Vec<f64>)> {
    if measure.is_isotropic() {
        let l = sphere.point(0);
        return Ok((measure.psi_lower(&scaled(l, r))?, l.to_vec()));
    }
    let mut best = (f64::INFINITY, Vec::new());
    for l in sphere.iter() {
        let v = measure.psi_lower(&scaled(l, r))?;
        if v < best.0 {
            best = (v, l.to_vec());
        }
    }
    Ok(best)
}

/// Where the comparability ratio is worst.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub r: f64,
    pub direction_sup: Vec<f64>,
    pub direction_inf: Vec<f64>,
    pub psi_star: f64,
    pub psi_lower_inf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionAReport {
    pub passed: bool,
    /// `sup_r psi_star(r) / inf_l psi_L(r l)`; infinite when some
    /// direction carries no small-scale mass.
    pub beta_hat: f64,
    pub worst: Witness,
    /// `(r, ratio)` at every sampled radius.
    pub samples: Vec<(f64, f64)>,
}

/// Log-spaced radii `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Checks `sup_l psi_U(r l) <= beta inf_l psi_L(r l)` on sampled radii and
/// reports the smallest admissible `beta`.
pub fn check_condition_a(measure: &LevyMeasureSpec, sphere: &SphereGrid, radii: &[f64]) -> Result<ConditionAReport> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii to sample".into()));
    }
    let mut samples = Vec::with_capacity(radii.len());
    let mut worst: Option<Witness> = None;
    let mut beta_hat = 0.0f64;
    for &r in radii {
        let (sup, l_sup) = psi_star_with_direction(measure, r, sphere)?;
        let (inf, l_inf) = psi_lower_inf(measure, r, sphere)?;
        let ratio = if inf > 0.0 { sup / inf } else { f64::INFINITY };
        samples.push((r, ratio));
        if worst.is_none() || ratio > beta_hat {
            beta_hat = ratio;
            worst = Some(Witness {
                r,
                direction_sup: l_sup,
                direction_inf: l_inf,
                psi_star: sup,
                psi_lower_inf: inf,
            });
        }
    }
    Ok(ConditionAReport {
        passed: beta_hat.is_finite(),
        beta_hat,
        worst: worst.expect("at least one radius"),
        samples,
    })
}

/// Largest `c` with `psi_U(xi) >= c |xi|^{2/beta}` at every sample.
pub fn growth_floor(measure: &LevyMeasureSpec, beta: f64, samples: &[Vec<f64>]) -> Result<f64> {
    let mut c = f64::INFINITY;
    for xi in samples {
        let s = norm(xi);
        if s == 0.0 {
            continue;
        }
        c = c.min(measure.psi_upper(xi)? / s.powf(2.0 / beta));
    }
    Ok(c)
}

/// Outcome of checking `(1 - cos 1) psi_L <= Re psi <= 2 psi_U`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub points: usize,
    pub violations: usize,
    /// `min Re psi / ((1 - cos 1) psi_L)` over points with `psi_L > 0`.
    pub lower_margin: f64,
    /// `min 2 psi_U / Re psi` over points with `Re psi > 0`.
    pub upper_margin: f64,
}

pub fn check_sandwich(triplet: &LevyTriplet, radii: &[f64], sphere: &SphereGrid) -> Result<SandwichReport> {
    let m = &triplet.measure;
    let mut rep = SandwichReport {
        points: 0,
        violations: 0,
        lower_margin: f64::INFINITY,
        upper_margin: f64::INFINITY,
    };
    for &r in radii {
        for l in sphere.iter() {
            let xi = scaled(l, r);
            let re = triplet.psi(&xi)?.re;
            let lo = ONE_MINUS_COS_ONE * m.psi_lower(&xi)?;
            let hi = 2.0 * m.psi_upper(&xi)?;
            rep.points += 1;
            // relative slack for rounding in the closed forms
            let slack = 1e-12 * hi.abs().max(1e-300);
            if re < lo - slack || re > hi + slack {
                rep.violations += 1;
            }
            if lo > 0.0 {
                rep.lower_margin = rep.lower_margin.min(re / lo);
            }
            if re > 0.0 {
                rep.upper_margin = rep.upper_margin.min(hi / re);
            }
        }
    }
    Ok(rep)
}

/// Solves `t psi_star(r) = 1` by bisection in `log r`, memoised per `t`.
#[derive(Debug)]
pub struct ScaleSolver {
    measure: LevyMeasureSpec,
    sphere: SphereGrid,
    rel_tol: f64,
    memo: Mutex<HashMap<u64, f64>>,
}

impl Clone for ScaleSolver {
    fn clone(&self) -> Self {
        ScaleSolver {
            measure: self.measure.clone(),
            sphere: self.sphere.clone(),
            rel_tol: self.rel_tol,
            memo: Mutex::new(self.memo.lock().unwrap().clone()),
        }
    }
}

impl ScaleSolver {
    pub fn new(measure: LevyMeasureSpec, sphere: SphereGrid) -> Self {
        ScaleSolver {
            measure,
            sphere,
            rel_tol: 1e-10,
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// Bisection stops when the bracket in `log r` is narrower than `tol`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self.memo.get_mut().unwrap().clear();
        self
    }

    pub fn psi_star(&self, r: f64) -> Result<f64> {
        psi_star(&self.measure, r, &self.sphere)
    }

    /// `rho_t = inf { r : psi_star(r) = 1/t }`.
    pub fn rho(&self, t: f64) -> Result<f64> {
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
        }
        if let Some(r) = self.memo.lock().unwrap().get(&t.to_bits()) {
            return Ok(*r);
        }
        let target = 1.0 / t;
        let (mut lo, mut hi) = (1e-8f64, 1e12f64);
        while self.psi_star(lo)? >= target {
            lo *= 1e-4;
            if lo < 1e-300 {
                return Err(Error::ScaleUnreachable { lo, hi });
            }
        }
        while self.psi_star(hi)? < target {
            hi *= 1e4;
            if hi > 1e300 {
                return Err(Error::ScaleUnreachable { lo, hi });
            }
        }
        let (mut a, mut b) = (lo.ln(), hi.ln());
        while b - a > self.rel_tol {
            let m = 0.5 * (a + b);
            if self.psi_star(m.exp())? >= target {
                b = m;
            } else {
                a = m;
            }
        }
        let r = b.exp();
        self.memo.lock().unwrap().insert(t.to_bits(), r);
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn cauchy_scale_closed_form() {
        // psi = |xi|, psi_U(s) = 4 s / pi, so rho_t = pi / (4 t)
        let m = LevyMeasureSpec::isotropic_stable(1, 1.0, 1.0 / PI).unwrap();
        let s = ScaleSolver::new(m, SphereGrid::new(1));
        for &t in &[1e-3, 0.1, 2.0] {
            assert_relative_eq!(s.rho(t).unwrap(), PI / (4.0 * t), max_relative = 1e-9);
        }
    }

    #[test]
    fn normalized_stable_has_unit_envelope() {
        for n in 1..=3 {
            for &a in &[0.7, 1.0, 1.5] {
                let m = LevyMeasureSpec::isotropic_stable_normalized(n, a).unwrap();
                let sph = SphereGrid::new(n);
                assert_relative_eq!(psi_star(&m, 3.0, &sph).unwrap(), 3f64.powf(a), max_relative = 1e-12);
                let rep = check_condition_a(&m, &sph, &log_space(10.0, 1e6, 20)).unwrap();
                assert!(rep.passed);
                assert_relative_eq!(rep.beta_hat, 1.0 + (2.0 - a) / a, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn finite_measure_scale_unreachable() {
        use crate::levy_model::Atom;
        let m = LevyMeasureSpec::TabulatedAtoms {
            dim: 1,
            atoms: vec![Atom {
                position: vec![1.0],
                weight: 1.0,
            }],
        };
        let s = ScaleSolver::new(m, SphereGrid::new(1));
        assert!(matches!(s.rho(1e-3), Err(Error::ScaleUnreachable { .. })));
    }

    #[test]
    fn axis_measure_fails_comparability() {
        let m = LevyMeasureSpec::axis_stable(2, 1.0, 0.5, 0.5, 0).unwrap();
        let rep = check_condition_a(&m, &SphereGrid::new(2), &log_space(10.0, 1e6, 10)).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.worst.direction_inf, vec![0.0, 1.0]);
    }
}
