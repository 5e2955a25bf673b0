//! Lévy triplets without Gaussian part and the measures they carry.
//!
//! Every variant answers the same radial questions (tail mass, exponent
//! pieces restricted to balls or their complements, first moments of
//! annuli) either in closed form or by one-dimensional quadrature.

use crate::error::{Error, Result};
use crate::quad::{adaptive, from_zero, to_infinity, Tol};
use crate::special::{
    g_lower, g_upper, gamma, one_minus_cos_integral, one_minus_phi, phi, phi_hyperbolic_minus_one,
    sphere_abs_moment, sphere_area, sphere_series_coeff, EULER_GAMMA,
};
use crate::sphere::SphereGrid;
use crate::tables::{table, TableKind};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial Lévy density `m(|u|)` for the `RadialDensity` variant.
#[derive(Clone)]
pub enum RadialProfile {
    /// `m(r) = c r^{-n-alpha} exp(-lambda r)`.
    TemperedStable { c: f64, alpha: f64, lambda: f64 },
    /// Arbitrary density, assumed to vanish beyond `outer_radius`.
    /// Not serialisable.
    Custom {
        name: String,
        density: RadialFn,
        outer_radius: f64,
    },
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::TemperedStable { c, alpha, lambda } => f
                .debug_struct("TemperedStable")
                .field("c", c)
                .field("alpha", alpha)
                .field("lambda", lambda)
                .finish(),
            RadialProfile::Custom { name, outer_radius, .. } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("outer_radius", outer_radius)
                .finish(),
        }
    }
}

impl PartialEq for RadialProfile {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                RadialProfile::TemperedStable { c, alpha, lambda },
                RadialProfile::TemperedStable {
                    c: c2,
                    alpha: a2,
                    lambda: l2,
                },
            ) => c == c2 && alpha == a2 && lambda == l2,
            (RadialProfile::Custom { density: d1, .. }, RadialProfile::Custom { density: d2, .. }) => {
                Arc::ptr_eq(d1, d2)
            }
            _ => false,
        }
    }
}

impl RadialProfile {
    pub fn density(&self, n: usize, r: f64) -> f64 {
        match self {
            RadialProfile::TemperedStable { c, alpha, lambda } => {
                c * r.powf(-(n as f64) - alpha) * (-lambda * r).exp()
            }
            RadialProfile::Custom { density, outer_radius, .. } => {
                if r > *outer_radius {
                    0.0
                } else {
                    density(r)
                }
            }
        }
    }

    fn outer_radius(&self) -> f64 {
        match self {
            // exp(-lambda r) below 1e-18 of its value at the origin scale
            RadialProfile::TemperedStable { lambda, .. } => 42.0 / lambda,
            RadialProfile::Custom { outer_radius, .. } => *outer_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub position: Vec<f64>,
    pub weight: f64,
}

/// How shells lying exactly on the truncation radius are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Shells at the radius stay with the small jumps.
    #[default]
    Exclude,
    /// Shells at the radius move to the big jumps.
    Include,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevyMeasureSpec {
    /// `mu(du) = c |u|^{-n-alpha} du`.
    IsotropicStable { dim: usize, alpha: f64, c: f64 },
    /// Uniform laws on spheres of radius `2^{-k upsilon}` with masses
    /// `2^{k gamma}`, `k_min <= k <= k_max`.
    DiscretizedStable {
        dim: usize,
        gamma: f64,
        upsilon: f64,
        k_min: i32,
        k_max: i32,
    },
    /// Isotropic measure with density `m(|u|)`.
    RadialDensity { dim: usize, profile: RadialProfile },
    /// Stable measure on the line through `axis`: `c_plus r^{-1-alpha} dr`
    /// on the positive ray and `c_minus` on the negative one. In one
    /// dimension this covers skewed stable laws; in higher dimensions the
    /// measure is degenerate.
    AxisStable {
        dim: usize,
        alpha: f64,
        c_plus: f64,
        c_minus: f64,
        axis: usize,
    },
    /// Finitely many atoms. Such a process is compound Poisson and has no
    /// transition density.
    TabulatedAtoms { dim: usize, atoms: Vec<Atom> },
}

fn check(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidModel(msg.into()))
    }
}

impl LevyMeasureSpec {
    pub fn isotropic_stable(dim: usize, alpha: f64, c: f64) -> Result<Self> {
        let m = LevyMeasureSpec::IsotropicStable { dim, alpha, c };
        m.validate()?;
        Ok(m)
    }

    /// Isotropic stable measure scaled so that `psi_star(r) = r^alpha`.
    pub fn isotropic_stable_normalized(dim: usize, alpha: f64) -> Result<Self> {
        let c = alpha * (2.0 - alpha) / (2.0 * sphere_abs_moment(dim, alpha));
        Self::isotropic_stable(dim, alpha, c)
    }

    /// Shell range chosen so the omitted big shells carry mass below
    /// `1e-12` and the omitted small shells change `psi_U` by less than
    /// `1e-10` relative up to frequency `1e12`.
    pub fn discretized_stable(dim: usize, gamma: f64, upsilon: f64) -> Result<Self> {
        check(gamma > 0.0 && upsilon > 0.0, "gamma and upsilon must be positive")?;
        check(gamma < 2.0 * upsilon, "need gamma < 2 upsilon")?;
        // big shells: k < 0, mass 2^{k gamma}; drop once below 1e-12
        let k_min = -((12.0 * 10f64.log2() / gamma).ceil() as i32);
        // small shells at frequency s contribute 2^{k(gamma - 2 upsilon)} s^2
        let slope = 2.0 * upsilon - gamma;
        let k_max = ((2.0 * 40.0 * 10f64.log2() / slope).ceil() as i32).max(10);
        let m = LevyMeasureSpec::DiscretizedStable {
            dim,
            gamma,
            upsilon,
            k_min,
            k_max,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn axis_stable(dim: usize, alpha: f64, c_plus: f64, c_minus: f64, axis: usize) -> Result<Self> {
        let m = LevyMeasureSpec::AxisStable {
            dim,
            alpha,
            c_plus,
            c_minus,
            axis,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        check((1..=3).contains(&d), format!("dimension {d} not supported (1..=3)"))?;
        match self {
            LevyMeasureSpec::IsotropicStable { alpha, c, .. } => {
                check(*alpha > 0.0 && *alpha < 2.0, "alpha must lie in (0, 2)")?;
                check(*c > 0.0 && c.is_finite(), "c must be positive")?;
            }
            LevyMeasureSpec::DiscretizedStable {
                gamma,
                upsilon,
                k_min,
                k_max,
                ..
            } => {
                check(*gamma > 0.0 && *upsilon > 0.0, "gamma and upsilon must be positive")?;
                check(*gamma < 2.0 * upsilon, "need gamma < 2 upsilon")?;
                check(k_min < k_max, "need k_min < k_max")?;
            }
            LevyMeasureSpec::RadialDensity { profile, .. } => {
                if let RadialProfile::TemperedStable { c, alpha, lambda } = profile {
                    check(*alpha > 0.0 && *alpha < 2.0, "alpha must lie in (0, 2)")?;
                    check(*c > 0.0, "c must be positive")?;
                    check(*lambda > 0.0, "lambda must be positive")?;
                }
                // \int (1 ∧ r^2) mu(dr) must be finite
                let v = self.integrate_radial(&|r: f64| (r * r).min(1.0), 0.0, f64::INFINITY);
                match v {
                    Ok(e) if e.is_finite() => {}
                    _ => return Err(Error::InvalidModel("\\int (1 ∧ |u|^2) mu(du) is not finite".into())),
                }
            }
            LevyMeasureSpec::AxisStable {
                alpha,
                c_plus,
                c_minus,
                axis,
                ..
            } => {
                check(*alpha > 0.0 && *alpha < 2.0, "alpha must lie in (0, 2)")?;
                check(*c_plus >= 0.0 && *c_minus >= 0.0, "ray weights must be non-negative")?;
                check(c_plus + c_minus > 0.0, "measure is zero")?;
                check(*axis < d, "axis out of range")?;
            }
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => {
                for a in atoms {
                    check(a.position.len() == d, "atom dimension mismatch")?;
                    check(a.weight > 0.0, "atom weights must be positive")?;
                    check(a.position.iter().any(|x| *x != 0.0), "atom at the origin")?;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            LevyMeasureSpec::IsotropicStable { dim, .. }
            | LevyMeasureSpec::DiscretizedStable { dim, .. }
            | LevyMeasureSpec::RadialDensity { dim, .. }
            | LevyMeasureSpec::AxisStable { dim, .. }
            | LevyMeasureSpec::TabulatedAtoms { dim, .. } => *dim,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            LevyMeasureSpec::IsotropicStable { .. } => "isotropic-stable",
            LevyMeasureSpec::DiscretizedStable { .. } => "discretized-stable",
            LevyMeasureSpec::RadialDensity { .. } => "radial-density",
            LevyMeasureSpec::AxisStable { .. } => "axis-stable",
            LevyMeasureSpec::TabulatedAtoms { .. } => "tabulated-atoms",
        }
    }

    /// True for measures with finite total mass.
    pub fn is_finite(&self) -> bool {
        matches!(self, LevyMeasureSpec::TabulatedAtoms { .. })
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(
            self,
            LevyMeasureSpec::IsotropicStable { .. }
                | LevyMeasureSpec::DiscretizedStable { .. }
                | LevyMeasureSpec::RadialDensity { .. }
        ) || (self.dim() == 1 && self.is_symmetric())
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            LevyMeasureSpec::AxisStable { c_plus, c_minus, .. } => c_plus == c_minus,
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => atoms.iter().all(|a| {
                atoms.iter().any(|b| {
                    b.weight == a.weight && a.position.iter().zip(&b.position).all(|(x, y)| *x == -*y)
                })
            }),
            _ => true,
        }
    }

    /// Has a Lebesgue density (needed by power-law bell bounds).
    pub fn has_density(&self) -> bool {
        match self {
            LevyMeasureSpec::IsotropicStable { .. } | LevyMeasureSpec::RadialDensity { .. } => true,
            LevyMeasureSpec::AxisStable { dim, .. } => *dim == 1,
            _ => false,
        }
    }

    /// Value of the Lebesgue density at `u` when it exists.
    pub fn density_at(&self, u: &[f64]) -> Option<f64> {
        let r = norm(u);
        match self {
            LevyMeasureSpec::IsotropicStable { dim, alpha, c } => Some(c * r.powf(-(*dim as f64) - alpha)),
            LevyMeasureSpec::RadialDensity { dim, profile } => Some(profile.density(*dim, r)),
            LevyMeasureSpec::AxisStable {
                dim: 1,
                alpha,
                c_plus,
                c_minus,
                ..
            } => Some(if u[0] > 0.0 { *c_plus } else { *c_minus } * r.powf(-1.0 - alpha)),
            _ => None,
        }
    }

    /// Shells `(radius, mass)` of a discretized stable measure.
    pub fn shells(&self) -> Vec<(f64, f64)> {
        match self {
            LevyMeasureSpec::DiscretizedStable {
                gamma,
                upsilon,
                k_min,
                k_max,
                ..
            } => (*k_min..=*k_max)
                .map(|k| (2f64.powf(-(k as f64) * upsilon), 2f64.powf(k as f64 * gamma)))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Radial part `nu(r) dr` of an isotropic measure with density.
    fn radial_weight(&self, r: f64) -> f64 {
        match self {
            LevyMeasureSpec::IsotropicStable { dim, alpha, c } => c * sphere_area(*dim) * r.powf(-1.0 - alpha),
            LevyMeasureSpec::RadialDensity { dim, profile } => {
                sphere_area(*dim) * r.powi(*dim as i32 - 1) * profile.density(*dim, r)
            }
            _ => unreachable!("radial_weight only for radial densities"),
        }
    }

    /// `\int_{lo}^{hi} f(r) nu(r) dr` for radial densities.
    fn integrate_radial(&self, f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        let tol = Tol::new(1e-300, 1e-11);
        let g = |r: f64| {
            if r <= 0.0 {
                0.0
            } else {
                f(r) * self.radial_weight(r)
            }
        };
        let hi = match self {
            LevyMeasureSpec::RadialDensity { profile, .. } => hi.min(profile.outer_radius()),
            _ => hi,
        };
        if lo >= hi {
            return Ok(0.0);
        }
        let mut total = 0.0;
        let mid_lo = lo.max(1e-300);
        if lo <= 0.0 {
            let b = hi.min(1.0);
            total += from_zero(g, b, tol)?.value;
            if hi <= 1.0 {
                return Ok(total);
            }
            return Ok(total + self.integrate_radial(f, 1.0, hi)?);
        }
        if hi.is_infinite() {
            total += to_infinity(g, mid_lo, tol)?.value;
        } else {
            // geometric panels keep the power-law weight well resolved
            let mut a = lo;
            while a < hi {
                let b = (2.0 * a).min(hi);
                total += adaptive(g, a, b, tol)?.value;
                a = b;
            }
        }
        Ok(total)
    }

    /// `mu{|u| > r}`.
    pub fn tail_mass(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::InvalidArgument("radius must be non-negative".into()));
        }
        Ok(match self {
            LevyMeasureSpec::IsotropicStable { dim, alpha, c } => c * sphere_area(*dim) * r.powf(-alpha) / alpha,
            LevyMeasureSpec::DiscretizedStable { .. } => {
                self.shells().iter().filter(|(rk, _)| *rk > r).map(|(_, m)| m).sum()
            }
            LevyMeasureSpec::RadialDensity { .. } => {
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    self.integrate_radial(&|_| 1.0, r, f64::INFINITY)?
                }
            }
            LevyMeasureSpec::AxisStable {
                alpha,
                c_plus,
                c_minus,
                ..
            } => (c_plus + c_minus) * r.powf(-alpha) / alpha,
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => {
                atoms.iter().filter(|a| norm(&a.position) > r).map(|a| a.weight).sum()
            }
        })
    }

    /// Jump part of the exponent,
    /// `\int (1 - e^{i xi.u} + i xi.u 1{|u|<1}) mu(du)`.
    pub fn psi_jump(&self, xi: &[f64]) -> Result<Complex64> {
        let s = norm(xi);
        Ok(match self {
            LevyMeasureSpec::IsotropicStable { dim, alpha, c } => {
                Complex64::new(c * sphere_abs_moment(*dim, *alpha) * one_minus_cos_integral(*alpha) * s.powf(*alpha), 0.0)
            }
            LevyMeasureSpec::DiscretizedStable { dim, .. } => Complex64::new(
                self.shells().iter().map(|(r, m)| m * one_minus_phi(*dim, r * s)).sum(),
                0.0,
            ),
            LevyMeasureSpec::RadialDensity { dim, .. } => {
                let n = *dim;
                Complex64::new(self.radial_oscillatory(&|v| one_minus_phi(n, v), s, 0.0, f64::INFINITY)?, 0.0)
            }
            LevyMeasureSpec::AxisStable {
                alpha,
                c_plus,
                c_minus,
                axis,
                ..
            } => {
                let x = xi[*axis];
                c_plus * one_sided_stable(*alpha, x) + c_minus * one_sided_stable(*alpha, -x)
            }
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => atoms
                .iter()
                .map(|a| {
                    let d = dot(xi, &a.position);
                    let comp = if norm(&a.position) < 1.0 { d } else { 0.0 };
                    a.weight * Complex64::new(1.0 - d.cos(), comp - d.sin())
                })
                .sum(),
        })
    }

    /// `\int f(|u| s) nu(r) dr` over `[lo, hi]` for oscillatory radial `f`:
    /// panels of width at most a quarter period beyond `1/s`.
    fn radial_oscillatory(&self, f: &dyn Fn(f64) -> f64, s: f64, lo: f64, hi: f64) -> Result<f64> {
        if s == 0.0 {
            return self.integrate_radial(&|r| f(0.0 * r), lo, hi);
        }
        let hi = match self {
            LevyMeasureSpec::RadialDensity { profile, .. } => hi.min(profile.outer_radius()),
            _ => hi,
        };
        let split = (1.0 / s).clamp(lo, hi);
        let mut total = self.integrate_radial(&|r| f(r * s), lo, split)?;
        if split < hi {
            let width = PI / s;
            let g = |r: f64| f(r * s) * self.radial_weight(r);
            let mut a = split;
            let mut panels = 0;
            while a < hi {
                let b = (a + width).min(hi);
                total += adaptive(g, a, b, Tol::new(1e-300, 1e-12))?.value;
                a = b;
                panels += 1;
                if panels > 200_000 {
                    return Err(Error::QuadratureFailure {
                        achieved: f64::NAN,
                        requested: 1e-12,
                    });
                }
            }
        }
        Ok(total)
    }

    /// `psi^U(xi) = \int ((xi.u)^2 ∧ 1) mu(du)`.
    pub fn psi_upper(&self, xi: &[f64]) -> Result<f64> {
        self.cutoff_exponent(xi, true)
    }

    /// `psi^L(xi) = \int_{|xi.u| <= 1} (xi.u)^2 mu(du)`.
    pub fn psi_lower(&self, xi: &[f64]) -> Result<f64> {
        self.cutoff_exponent(xi, false)
    }

    fn cutoff_exponent(&self, xi: &[f64], upper: bool) -> Result<f64> {
        let s = norm(xi);
        let g = |n: usize, a: f64| if upper { g_upper(n, a) } else { g_lower(n, a) };
        Ok(match self {
            LevyMeasureSpec::IsotropicStable { dim, alpha, c } => {
                let k = if upper {
                    1.0 / (2.0 - alpha) + 1.0 / alpha
                } else {
                    1.0 / (2.0 - alpha)
                };
                c * sphere_abs_moment(*dim, *alpha) * k * s.powf(*alpha)
            }
            LevyMeasureSpec::DiscretizedStable { dim, .. } => {
                self.shells().iter().map(|(r, m)| m * g(*dim, r * s)).sum()
            }
            LevyMeasureSpec::RadialDensity { dim, .. } => {
                if s == 0.0 {
                    return Ok(0.0);
                }
                let n = *dim;
                let a = self.integrate_radial(&|r| g(n, r * s), 0.0, 1.0 / s)?;
                let b = self.integrate_radial(&|r| g(n, r * s), 1.0 / s, f64::INFINITY)?;
                a + b
            }
            LevyMeasureSpec::AxisStable {
                alpha,
                c_plus,
                c_minus,
                axis,
                ..
            } => {
                let k = if upper {
                    1.0 / (2.0 - alpha) + 1.0 / alpha
                } else {
                    1.0 / (2.0 - alpha)
                };
                (c_plus + c_minus) * k * xi[*axis].abs().powf(*alpha)
            }
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => atoms
                .iter()
                .map(|a| {
                    let d = dot(xi, &a.position).powi(2);
                    a.weight
                        * if upper {
                            d.min(1.0)
                        } else if d <= 1.0 {
                            d
                        } else {
                            0.0
                        }
                })
                .sum(),
        })
    }

    fn in_small(r: f64, radius: f64, policy: BoundaryPolicy) -> bool {
        match policy {
            BoundaryPolicy::Exclude => r <= radius,
            BoundaryPolicy::Include => r < radius,
        }
    }

    /// Small-jump exponent without the factor `t`:
    /// `\int_{|u| <= R} (1 - e^{i xi.u} + i xi.u) mu(du)`.
    pub fn small_jump_exponent(&self, xi: &[f64], radius: f64, policy: BoundaryPolicy) -> Result<Complex64> {
        let s = norm(xi);
        Ok(match self {
            LevyMeasureSpec::IsotropicStable { dim, alpha, c } => {
                let g = table(TableKind::OneMinusPhi(*dim), *alpha).eval(radius * s);
                Complex64::new(c * sphere_area(*dim) * s.powf(*alpha) * g, 0.0)
            }
            LevyMeasureSpec::DiscretizedStable { dim, .. } => Complex64::new(
                self.shells()
                    .iter()
                    .filter(|(r, _)| Self::in_small(*r, radius, policy))
                    .map(|(r, m)| m * one_minus_phi(*dim, r * s))
                    .sum(),
                0.0,
            ),
            LevyMeasureSpec::RadialDensity { dim, .. } => {
                let n = *dim;
                Complex64::new(self.radial_oscillatory(&|v| one_minus_phi(n, v), s, 0.0, radius)?, 0.0)
            }
            LevyMeasureSpec::AxisStable {
                alpha,
                c_plus,
                c_minus,
                axis,
                ..
            } => {
                let x = xi[*axis];
                let a = x.abs();
                let f = table(TableKind::OneMinusPhi(1), *alpha).eval(radius * a);
                let h = table(TableKind::VMinusSin, *alpha).eval(radius * a);
                let p = a.powf(*alpha);
                Complex64::new(p * (c_plus + c_minus) * f, x.signum() * p * (c_plus - c_minus) * h)
            }
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => atoms
                .iter()
                .filter(|a| Self::in_small(norm(&a.position), radius, policy))
                .map(|a| {
                    let d = dot(xi, &a.position);
                    a.weight * Complex64::new(1.0 - d.cos(), d - d.sin())
                })
                .sum(),
        })
    }

    /// Small-jump exponent at the imaginary frequency `i eta`, without `t`:
    /// `\int_{|u| <= R} (1 - e^{-eta.u} - eta.u) mu(du)` (real, non-positive).
    pub fn small_jump_exponent_imaginary(&self, eta: &[f64], radius: f64, policy: BoundaryPolicy) -> Result<f64> {
        let s = norm(eta);
        Ok(match self {
            LevyMeasureSpec::IsotropicStable { dim, alpha, c } => {
                let x = radius * s;
                let x2 = x * x;
                let mut p = x2;
                let mut sum = 0.0;
                for k in 1..200 {
                    let term = sphere_series_coeff(*dim, k) * p / (2.0 * k as f64 - alpha);
                    sum += term;
                    if term < 1e-17 * sum {
                        break;
                    }
                    p *= x2;
                }
                -c * sphere_area(*dim) * s.powf(*alpha) * sum * x.powf(-alpha)
            }
            LevyMeasureSpec::DiscretizedStable { dim, .. } => -self
                .shells()
                .iter()
                .filter(|(r, _)| Self::in_small(*r, radius, policy))
                .map(|(r, m)| m * phi_hyperbolic_minus_one(*dim, r * s))
                .sum::<f64>(),
            LevyMeasureSpec::RadialDensity { dim, .. } => {
                let n = *dim;
                -self.integrate_radial(&|r| phi_hyperbolic_minus_one(n, r * s), 0.0, radius)?
            }
            LevyMeasureSpec::AxisStable {
                alpha,
                c_plus,
                c_minus,
                axis,
                ..
            } => {
                let e = eta[*axis];
                // \int_0^R (1 - e^{-x r} - x r) r^{-1-a} dr = -R^{-a} sum_{k>=2} (-xR)^k / (k! (k-a))
                let ray = |x: f64| {
                    let y = -x * radius;
                    let mut f = y * y / 2.0;
                    let mut sum = 0.0;
                    for k in 2..400 {
                        let term = f / (k as f64 - alpha);
                        sum += term;
                        if term.abs() < 1e-17 * sum.abs() {
                            break;
                        }
                        f *= y / (k + 1) as f64;
                    }
                    -sum * radius.powf(-alpha)
                };
                c_plus * ray(e) + c_minus * ray(-e)
            }
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => atoms
                .iter()
                .filter(|a| Self::in_small(norm(&a.position), radius, policy))
                .map(|a| {
                    let d = dot(eta, &a.position);
                    a.weight * (1.0 - (-d).exp() - d)
                })
                .sum(),
        })
    }

    /// Fourier transform of the annulus `R < |u| <= R_cut`:
    /// `\int e^{i xi.u} mu(du)`.
    pub fn big_jump_transform(&self, xi: &[f64], radius: f64, cut: f64, policy: BoundaryPolicy) -> Result<Complex64> {
        let s = norm(xi);
        if cut <= radius {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(match self {
            LevyMeasureSpec::IsotropicStable { dim, alpha, c } => {
                let k = c * sphere_area(*dim);
                let mass = k * (radius.powf(-alpha) - cut.powf(-alpha)) / alpha;
                if s == 0.0 {
                    return Ok(Complex64::new(mass, 0.0));
                }
                let t = table(TableKind::OneMinusPhi(*dim), *alpha);
                Complex64::new(mass - k * s.powf(*alpha) * (t.eval(cut * s) - t.eval(radius * s)), 0.0)
            }
            LevyMeasureSpec::DiscretizedStable { dim, .. } => Complex64::new(
                self.shells()
                    .iter()
                    .filter(|(r, _)| !Self::in_small(*r, radius, policy) && *r <= cut)
                    .map(|(r, m)| m * phi(*dim, r * s))
                    .sum(),
                0.0,
            ),
            LevyMeasureSpec::RadialDensity { dim, .. } => {
                let n = *dim;
                Complex64::new(self.radial_oscillatory(&|v| phi(n, v), s, radius, cut)?, 0.0)
            }
            LevyMeasureSpec::AxisStable {
                alpha,
                c_plus,
                c_minus,
                axis,
                ..
            } => {
                let x = xi[*axis];
                let a = x.abs();
                let mass = (c_plus + c_minus) * (radius.powf(-alpha) - cut.powf(-alpha)) / alpha;
                if a == 0.0 {
                    return Ok(Complex64::new(mass, 0.0));
                }
                let f = table(TableKind::OneMinusPhi(1), *alpha);
                let h = table(TableKind::VMinusSin, *alpha);
                let (lo, hi) = (radius * a, cut * a);
                let p = a.powf(*alpha);
                let re = mass - (c_plus + c_minus) * p * (f.eval(hi) - f.eval(lo));
                let pow = if (alpha - 1.0).abs() < 1e-12 {
                    (hi / lo).ln()
                } else {
                    (hi.powf(1.0 - alpha) - lo.powf(1.0 - alpha)) / (1.0 - alpha)
                };
                let sin_int = pow - (h.eval(hi) - h.eval(lo));
                Complex64::new(re, x.signum() * (c_plus - c_minus) * p * sin_int)
            }
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => atoms
                .iter()
                .filter(|a| {
                    let r = norm(&a.position);
                    !Self::in_small(r, radius, policy) && r <= cut
                })
                .map(|a| {
                    let d = dot(xi, &a.position);
                    a.weight * Complex64::new(d.cos(), d.sin())
                })
                .sum(),
        })
    }

    /// Mass of the annulus `R < |u| <= R_cut` with the same boundary policy
    /// as [`big_jump_transform`](Self::big_jump_transform).
    pub fn annulus_mass(&self, radius: f64, cut: f64, policy: BoundaryPolicy) -> Result<f64> {
        if cut <= radius {
            return Ok(0.0);
        }
        match self {
            LevyMeasureSpec::DiscretizedStable { .. } => Ok(self
                .shells()
                .iter()
                .filter(|(r, _)| !Self::in_small(*r, radius, policy) && *r <= cut)
                .map(|(_, m)| m)
                .sum()),
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => Ok(atoms
                .iter()
                .filter(|a| {
                    let r = norm(&a.position);
                    !Self::in_small(r, radius, policy) && r <= cut
                })
                .map(|a| a.weight)
                .sum()),
            _ => {
                let far = if cut.is_finite() { self.tail_mass(cut)? } else { 0.0 };
                Ok(self.tail_mass(radius)? - far)
            }
        }
    }

    /// Signed first moment that turns the compensator at radius 1 into one
    /// at radius `R`: `\int_{R<|u|<1} u mu(du)` when `R < 1` and
    /// `-\int_{1<=|u|<=R} u mu(du)` otherwise.
    pub fn compensator_shift(&self, radius: f64, policy: BoundaryPolicy) -> Result<Vec<f64>> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        match self {
            LevyMeasureSpec::AxisStable {
                alpha,
                c_plus,
                c_minus,
                axis,
                ..
            } => {
                // \int_R^1 r^{-alpha} dr, negative when R > 1
                let m = if (alpha - 1.0).abs() < 1e-12 {
                    -radius.ln()
                } else {
                    (1.0 - radius.powf(1.0 - alpha)) / (1.0 - alpha)
                };
                out[*axis] = (c_plus - c_minus) * m;
            }
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => {
                for a in atoms {
                    let r = norm(&a.position);
                    let compensated = r < 1.0;
                    let small = Self::in_small(r, radius, policy);
                    let sign = match (compensated, small) {
                        (true, false) => 1.0,
                        (false, true) => -1.0,
                        _ => 0.0,
                    };
                    for (o, x) in out.iter_mut().zip(&a.position) {
                        *o += sign * a.weight * x;
                    }
                }
            }
            // symmetric shells and radial densities have zero first moments
            _ => {}
        }
        Ok(out)
    }

    /// `\int_{lo < |u| <= hi} f(u) mu(du)`, using `sphere` for angular
    /// averages of isotropic variants.
    pub fn integrate(&self, f: &dyn Fn(&[f64]) -> f64, lo: f64, hi: f64, sphere: &SphereGrid) -> Result<f64> {
        if lo >= hi {
            return Ok(0.0);
        }
        let d = self.dim();
        let angular = |r: f64| -> f64 {
            let mut u = vec![0.0; d];
            let mut acc = 0.0;
            for l in sphere.iter() {
                for (ui, li) in u.iter_mut().zip(l) {
                    *ui = r * li;
                }
                acc += f(&u);
            }
            acc / sphere.len() as f64
        };
        match self {
            LevyMeasureSpec::IsotropicStable { .. } | LevyMeasureSpec::RadialDensity { .. } => {
                if lo <= 0.0 {
                    self.check_origin(&angular)?;
                }
                self.integrate_radial(&angular, lo.max(0.0), hi)
            }
            LevyMeasureSpec::DiscretizedStable { .. } => Ok(self
                .shells()
                .iter()
                .filter(|(r, _)| *r > lo && *r <= hi)
                .map(|(r, m)| m * angular(*r))
                .sum()),
            LevyMeasureSpec::AxisStable {
                alpha,
                c_plus,
                c_minus,
                axis,
                ..
            } => {
                let ray = |sign: f64| {
                    move |r: f64| {
                        let mut u = vec![0.0; d];
                        u[*axis] = sign * r;
                        f(&u)
                    }
                };
                let (p, m) = (ray(1.0), ray(-1.0));
                if lo <= 0.0 {
                    let probe = |r: f64| c_plus * p(r) + c_minus * m(r);
                    self.check_origin(&probe)?;
                }
                let g = |r: f64| (c_plus * p(r) + c_minus * m(r)) * r.powf(-1.0 - alpha);
                let tol = Tol::new(1e-300, 1e-11);
                let mut total = 0.0;
                let split = 1.0f64.clamp(lo.max(0.0), hi);
                if lo <= 0.0 {
                    total += from_zero(g, split, tol)?.value;
                } else if split > lo {
                    total += adaptive(g, lo, split, tol)?.value;
                }
                if hi > split {
                    total += if hi.is_infinite() {
                        to_infinity(g, split, tol)?.value
                    } else {
                        adaptive(g, split, hi, tol)?.value
                    };
                }
                Ok(total)
            }
            LevyMeasureSpec::TabulatedAtoms { atoms, .. } => Ok(atoms
                .iter()
                .filter(|a| {
                    let r = norm(&a.position);
                    r > lo && r <= hi
                })
                .map(|a| a.weight * f(&a.position))
                .sum()),
        }
    }

    /// Rejects integrands that do not vanish like `|u|^2` at the origin.
    fn check_origin(&self, f: &dyn Fn(f64) -> f64) -> Result<()> {
        let (r1, r2) = (1e-4, 1e-6);
        let (a, b) = (f(r1).abs() / (r1 * r1), f(r2).abs() / (r2 * r2));
        if b > 100.0 * a.max(1e-300) && b > 1e-300 {
            return Err(Error::SingularIntegrand);
        }
        Ok(())
    }
}

/// `\int_0^inf (1 - e^{i s r} + i s r 1{r<1}) r^{-1-alpha} dr`.
pub fn one_sided_stable(alpha: f64, s: f64) -> Complex64 {
    if s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = s.abs();
    if (alpha - 1.0).abs() < 1e-12 {
        let re = PI / 2.0 * a;
        // \int_0^inf (sin(s r) - s r 1{r<1}) r^{-2} dr = s (1 - gamma_E) - s ln|s|
        let im = -(s * (1.0 - EULER_GAMMA) - s * a.ln());
        return Complex64::new(re, im);
    }
    let g = gamma(-alpha);
    let phase = -PI * alpha * s.signum() / 2.0;
    let pow = Complex64::from_polar(a.powf(alpha), phase);
    -g * pow + Complex64::new(0.0, s / (1.0 - alpha))
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Drift plus Lévy measure; the Gaussian part is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriplet {
    pub drift: Vec<f64>,
    pub measure: LevyMeasureSpec,
}

impl LevyTriplet {
    pub fn new(drift: Vec<f64>, measure: LevyMeasureSpec) -> Result<Self> {
        if drift.len() != measure.dim() {
            return Err(Error::InvalidModel(format!(
                "drift has {} components, measure has dimension {}",
                drift.len(),
                measure.dim()
            )));
        }
        if drift.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidModel("drift must be finite".into()));
        }
        measure.validate()?;
        Ok(LevyTriplet { drift, measure })
    }

    pub fn driftless(measure: LevyMeasureSpec) -> Result<Self> {
        let d = measure.dim();
        Self::new(vec![0.0; d], measure)
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    /// `psi(xi) = i a.xi + \int (1 - e^{i xi.u} + i xi.u 1{|u|<1}) mu(du)`,
    /// so that `E e^{i xi.Z_t} = e^{-t psi(xi)}`.
    pub fn psi(&self, xi: &[f64]) -> Result<Complex64> {
        Ok(Complex64::new(0.0, dot(&self.drift, xi)) + self.measure.psi_jump(xi)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cauchy_tail_mass() {
        let m = LevyMeasureSpec::isotropic_stable(1, 1.0, 1.0 / PI).unwrap();
        assert_relative_eq!(m.tail_mass(1.0).unwrap(), 2.0 / PI, max_relative = 1e-14);
        // same number by quadrature of f = 1 over [1, inf)
        let s = SphereGrid::new(1);
        let q = m.integrate(&|_| 1.0, 1.0, f64::INFINITY, &s).unwrap();
        assert_relative_eq!(q, 2.0 / PI, max_relative = 1e-9);
    }

    #[test]
    fn stable_tail_by_quadrature() {
        for &(n, a) in &[(1usize, 0.7), (2, 1.5), (3, 1.2)] {
            let m = LevyMeasureSpec::isotropic_stable(n, a, 0.3).unwrap();
            let s = SphereGrid::new(n);
            let q = m.integrate(&|_| 1.0, 2.0, f64::INFINITY, &s).unwrap();
            assert_relative_eq!(q, m.tail_mass(2.0).unwrap(), max_relative = 1e-9);
        }
    }

    #[test]
    fn singular_integrand_rejected() {
        let m = LevyMeasureSpec::isotropic_stable(1, 1.0, 1.0).unwrap();
        let s = SphereGrid::new(1);
        assert_eq!(m.integrate(&|_| 1.0, 0.0, 1.0, &s), Err(Error::SingularIntegrand));
        let q = m.integrate(&|u| u[0] * u[0], 0.0, 1.0, &s).unwrap();
        // \int_{-1}^{1} u^2 |u|^{-2} du = 2
        assert_relative_eq!(q, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn discretized_shell_sums() {
        let m = LevyMeasureSpec::discretized_stable(2, 1.0, 1.0).unwrap();
        // shells at 2^{-k} with mass 2^k; tail beyond 1/2 counts k <= 0
        let exact: f64 = m.shells().iter().filter(|(r, _)| *r > 0.5).map(|(_, w)| w).sum();
        assert_relative_eq!(exact, 2.0, max_relative = 1e-11);
        assert_relative_eq!(m.tail_mass(0.5).unwrap(), exact, max_relative = 1e-15);
    }

    #[test]
    fn small_jump_tables_match_sphere_quadrature() {
        // table route against brute-force angular x radial quadrature
        for &(n, a, radius) in &[(1usize, 0.6, 50.0), (2, 1.0, 20.0), (2, 1.7, 20.0), (3, 1.3, 2.0)] {
            let m = LevyMeasureSpec::isotropic_stable(n, a, 0.4).unwrap();
            let sph = SphereGrid::with_resolution(n, 4000);
            let mut xi = vec![0.0; n];
            xi[0] = 2.3;
            let f = |u: &[f64]| 2.0 * (dot(&xi, u) / 2.0).sin().powi(2);
            let q = m.integrate(&f, 0.0, radius, &sph).unwrap();
            let t = m.small_jump_exponent(&xi, radius, BoundaryPolicy::Exclude).unwrap();
            assert_relative_eq!(t.re, q, max_relative = 2e-6);
        }
    }

    /// `\int_0^inf g(u) u^{-1-a} du` for oscillating `g` with unit panels up
    /// to `X` and the first asymptotic term beyond.
    fn ray_integral(g: &dyn Fn(f64) -> f64, tail: f64, a: f64) -> f64 {
        let x_max = 5000.0;
        let tol = Tol::new(1e-15, 1e-13);
        let h = |u: f64| g(u) * u.powf(-1.0 - a);
        let mut total = from_zero(h, 1.0, tol).unwrap().value;
        let mut lo = 1.0;
        while lo < x_max {
            total += adaptive(h, lo, lo + 1.0, tol).unwrap().value;
            lo += 1.0;
        }
        total + tail
    }

    #[test]
    fn one_sided_matches_quadrature() {
        for &a in &[0.5, 1.0, 1.5] {
            for &s in &[0.7f64, -2.5] {
                let x = 5000.0f64;
                let re_tail = x.powf(-a) / a + (s * x).sin() * x.powf(-1.0 - a) / s;
                let re = ray_integral(&|u| 2.0 * (s * u / 2.0).sin().powi(2), re_tail, a);
                let im_tail = -(s * x).cos() * x.powf(-1.0 - a) / s;
                let im = ray_integral(
                    &|u: f64| {
                        let y = s * u;
                        if u >= 1.0 {
                            -y.sin()
                        } else if y.abs() < 0.5 {
                            let (mut term, mut acc) = (y.powi(3) / 6.0, 0.0);
                            for k in 1..12 {
                                acc += term;
                                term *= -y * y / (((2 * k + 2) * (2 * k + 3)) as f64);
                            }
                            acc
                        } else {
                            y - y.sin()
                        }
                    },
                    im_tail,
                    a,
                );
                let v = one_sided_stable(a, s);
                assert_relative_eq!(v.re, re, max_relative = 1e-8);
                assert_relative_eq!(v.im, im, max_relative = 1e-8, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn small_jump_exponent_splits_psi() {
        // psi = small part + (mass - big transform) + i xi.(compensator shift)
        let cases = vec![
            LevyMeasureSpec::isotropic_stable(2, 1.2, 0.3).unwrap(),
            LevyMeasureSpec::discretized_stable(2, 1.0, 1.0).unwrap(),
            LevyMeasureSpec::axis_stable(1, 0.7, 1.0, 0.2, 0).unwrap(),
            LevyMeasureSpec::axis_stable(1, 1.0, 1.0, 0.0, 0).unwrap(),
            LevyMeasureSpec::axis_stable(1, 1.6, 0.5, 1.5, 0).unwrap(),
        ];
        for m in cases {
            let n = m.dim();
            for &radius in &[0.3, 2.0] {
                let mut xi = vec![0.0; n];
                xi[0] = 1.7;
                if n == 2 {
                    xi[1] = -0.4;
                }
                let pol = BoundaryPolicy::Exclude;
                let small = m.small_jump_exponent(&xi, radius, pol).unwrap();
                let cut = 1e9;
                let mass = m.annulus_mass(radius, cut, pol).unwrap();
                let big = m.big_jump_transform(&xi, radius, cut, pol).unwrap();
                // beyond the cut the oscillating part is O(far / (|xi| cut))
                let far = m.tail_mass(cut).unwrap();
                let shift = m.compensator_shift(radius, pol).unwrap();
                let total = small + Complex64::new(mass + far, 0.0) - big + Complex64::new(0.0, dot(&xi, &shift));
                let psi = m.psi_jump(&xi).unwrap();
                assert_relative_eq!(total.re, psi.re, max_relative = 1e-8);
                assert_relative_eq!(total.im, psi.im, max_relative = 1e-7, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn tempered_stable_exponent_closed_form() {
        // 1d: \int (1 - cos(s u)) c |u|^{-1-a} e^{-l|u|} du
        //     = 2 c Gamma(-a) (l^a - Re (l - i s)^a)
        let (c, a, l) = (0.8, 0.6, 1.5);
        let m = LevyMeasureSpec::RadialDensity {
            dim: 1,
            profile: RadialProfile::TemperedStable { c, alpha: a, lambda: l },
        };
        m.validate().unwrap();
        for &s in &[0.3, 4.0, 25.0] {
            let z = Complex64::new(l, -s).powf(a);
            let exact = 2.0 * c * gamma(-a) * (l.powf(a) - z.re);
            assert_relative_eq!(m.psi_jump(&[s]).unwrap().re, exact, max_relative = 1e-8);
        }
    }
}
