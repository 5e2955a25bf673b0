//! Closed forms shared by the exponent and density code: sphere moments,
//! the angular average of `cos(v l_1)` (called `phi_n` here) and the angular
//! averages of the two quadratic cut-offs.

use std::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    puruspe::gamma(x)
}

pub fn bessel_j0(x: f64) -> f64 {
    puruspe::Jn(0, x.abs())
}

pub fn bessel_j1(x: f64) -> f64 {
    let v = puruspe::Jn(1, x.abs());
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// `E |l_1|^a` for `l` uniform on the unit sphere of `R^n`.
pub fn sphere_abs_moment_mean(n: usize, a: f64) -> f64 {
    let h = n as f64 / 2.0;
    gamma(h) * gamma((a + 1.0) / 2.0) / (PI.sqrt() * gamma((h + a / 2.0).max(1e-300)))
}

/// `A_{n,a} = \int_S |l_1|^a dsigma` over the (unnormalised) sphere.
pub fn sphere_abs_moment(n: usize, a: f64) -> f64 {
    sphere_area(n) * sphere_abs_moment_mean(n, a)
}

/// `\int_0^inf (1 - cos v) v^{-1-a} dv` for `0 < a < 2`.
///
/// Written through the reflection formula so it is smooth across `a = 1`.
pub fn one_minus_cos_integral(a: f64) -> f64 {
    PI / (2.0 * gamma(1.0 + a) * (PI * a / 2.0).sin())
}

/// Coefficients `c_k = E[l_1^{2k}] / (2k)!` so that
/// `1 - phi_n(v) = sum_{k>=1} (-1)^{k+1} c_k v^{2k}`.
fn sphere_series_coeffs(n: usize) -> &'static [f64] {
    use std::sync::OnceLock;
    static TABLES: [OnceLock<Vec<f64>>; 4] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    TABLES[n.min(3)].get_or_init(|| {
        let h = n as f64 / 2.0;
        let mut out = vec![0.0; 80];
        // k = 0 coefficient is 1; out[k] holds c_k
        let mut c = 1.0;
        out[0] = 1.0;
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let kf = k as f64;
            c *= (kf - 0.5) / ((kf - 1.0 + h) * (2.0 * kf) * (2.0 * kf - 1.0));
            *slot = c;
        }
        out
    })
}

/// Series coefficient `c_k` (see [`one_minus_phi`]).
pub fn sphere_series_coeff(n: usize, k: usize) -> f64 {
    sphere_series_coeffs(n)[k]
}

/// `phi_n(v) = E cos(v l_1)` with `l` uniform on the sphere of `R^n`.
pub fn phi(n: usize, v: f64) -> f64 {
    match n {
        1 => v.cos(),
        2 => bessel_j0(v),
        3 => {
            if v.abs() < 1e-3 {
                1.0 - one_minus_phi(3, v)
            } else {
                v.sin() / v
            }
        }
        _ => 1.0 - one_minus_phi(n, v),
    }
}

/// `1 - phi_n(v)` without cancellation for small `v`.
pub fn one_minus_phi(n: usize, v: f64) -> f64 {
    let v = v.abs();
    if v < 1.0 || n > 3 {
        let c = sphere_series_coeffs(n);
        let v2 = v * v;
        let mut p = v2;
        let mut s = 0.0;
        for (k, ck) in c.iter().enumerate().skip(1) {
            let term = ck * p;
            if k % 2 == 1 {
                s += term;
            } else {
                s -= term;
            }
            if term.abs() < 1e-18 * s.abs() {
                break;
            }
            p *= v2;
        }
        return s;
    }
    match n {
        1 => 2.0 * (v / 2.0).sin().powi(2),
        2 => 1.0 - bessel_j0(v),
        _ => 1.0 - v.sin() / v,
    }
}

/// `E exp(v l_1) - 1`, i.e. `cosh v - 1`, `I_0(v) - 1` or `sinh(v)/v - 1`.
pub fn phi_hyperbolic_minus_one(n: usize, v: f64) -> f64 {
    let c = sphere_series_coeffs(n);
    let v2 = v * v;
    let mut p = v2;
    let mut s = 0.0;
    for ck in c.iter().skip(1) {
        let term = ck * p;
        s += term;
        if term < 1e-18 * s {
            break;
        }
        p *= v2;
    }
    s
}

/// `q - sin(2q)/2`, by series where it would cancel.
fn q_minus_half_sin2q(q: f64) -> f64 {
    if q > 0.25 {
        return q - (2.0 * q).sin() / 2.0;
    }
    // sum_{k>=1} (-1)^{k+1} (2q)^{2k+1} / (2 (2k+1)!)
    let x = 2.0 * q;
    let mut term = x * x * x / 12.0;
    let mut s = 0.0f64;
    let mut k = 1;
    while term.abs() > 1e-18 * s.abs() {
        s += term;
        term *= -x * x / ((2 * k + 2) * (2 * k + 3)) as f64;
        k += 1;
    }
    s
}

/// `E[(a l_1)^2 ∧ 1]` for `l` uniform on the sphere and `a >= 0`.
pub fn g_upper(n: usize, a: f64) -> f64 {
    let a = a.abs();
    if a <= 1.0 {
        return a * a / n as f64;
    }
    match n {
        1 => 1.0,
        2 => {
            let q = (1.0 / a).asin();
            1.0 - 2.0 * q / PI + a * a / PI * q_minus_half_sin2q(q)
        }
        3 => 1.0 - 2.0 / (3.0 * a),
        _ => panic!("dimension {n} not supported"),
    }
}

/// `E[(a l_1)^2 1{|a l_1| <= 1}]` for `l` uniform on the sphere and `a >= 0`.
pub fn g_lower(n: usize, a: f64) -> f64 {
    let a = a.abs();
    if a <= 1.0 {
        return a * a / n as f64;
    }
    match n {
        1 => 0.0,
        2 => {
            let q = (1.0 / a).asin();
            a * a / PI * q_minus_half_sin2q(q)
        }
        3 => 1.0 / (3.0 * a),
        _ => panic!("dimension {n} not supported"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn planar_cutoffs_stay_stable() {
        for &a in &[1.5, 4.0, 1e3, 1e8, 1e14] {
            // 2-d: behaves like 2/(3 pi a) at large a
            let lo = g_lower(2, a);
            assert!(lo > 0.0 && lo < 1.0, "{a}: {lo}");
            let q = (1.0f64 / a).asin();
            let direct = a * a / PI * (q - (2.0 * q).sin() / 2.0);
            if a < 10.0 {
                assert_relative_eq!(lo, direct, max_relative = 1e-12);
            }
            if a > 1e6 {
                assert_relative_eq!(lo, 2.0 / (3.0 * PI * a), max_relative = 1e-6);
            }
            assert!(g_upper(2, a) <= 1.0 && g_upper(2, a) > 1.0 - 2.0 / a);
        }
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn abs_moments_closed_forms() {
        for &a in &[0.3, 1.0, 1.7] {
            assert_relative_eq!(sphere_abs_moment(1, a), 2.0, max_relative = 1e-13);
            assert_relative_eq!(
                sphere_abs_moment(3, a),
                4.0 * PI / (a + 1.0),
                max_relative = 1e-13
            );
            // direct angular quadrature in 2d
            let m = 20000;
            let q: f64 = (0..m)
                .map(|j| ((j as f64 + 0.5) * 2.0 * PI / m as f64).cos().abs().powf(a))
                .sum::<f64>()
                * 2.0
                * PI
                / m as f64;
            assert_relative_eq!(sphere_abs_moment(2, a), q, max_relative = 1e-5);
        }
    }

    #[test]
    fn cos_integral_known_values() {
        assert_relative_eq!(one_minus_cos_integral(1.0), PI / 2.0, max_relative = 1e-14);
        for &a in &[0.5, 1.5] {
            let direct = gamma(1.0 - a) * (PI * a / 2.0).cos() / a;
            assert_relative_eq!(one_minus_cos_integral(a), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn phi_series_matches_closed_form() {
        for n in 1..=3 {
            for &v in &[0.05f64, 0.4, 0.99] {
                let closed = match n {
                    1 => 1.0 - v.cos(),
                    2 => 1.0 - bessel_j0(v),
                    _ => 1.0 - v.sin() / v,
                };
                assert_relative_eq!(one_minus_phi(n, v), closed, max_relative = 1e-10);
            }
        }
        assert_relative_eq!(phi_hyperbolic_minus_one(1, 0.7), 0.7f64.cosh() - 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            phi_hyperbolic_minus_one(3, 0.7),
            0.7f64.sinh() / 0.7 - 1.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn angular_cutoffs_match_quadrature() {
        for &a in &[0.3, 1.0, 1.3, 4.0, 55.0] {
            let m = 200_000;
            let (mut u, mut l) = (0.0, 0.0);
            for j in 0..m {
                let x = a * ((j as f64 + 0.5) * 2.0 * PI / m as f64).cos();
                u += (x * x).min(1.0);
                if x.abs() <= 1.0 {
                    l += x * x;
                }
            }
            assert_relative_eq!(g_upper(2, a), u / m as f64, max_relative = 1e-6);
            // the cut-off makes the midpoint rule first order
            assert_relative_eq!(g_lower(2, a), l / m as f64, max_relative = 2e-3);
            // n = 3: l_1 is uniform on [-1, 1]
            let (mut u3, mut l3) = (0.0, 0.0);
            for j in 0..m {
                let x = a * (-1.0 + (j as f64 + 0.5) * 2.0 / m as f64);
                u3 += (x * x).min(1.0);
                if x.abs() <= 1.0 {
                    l3 += x * x;
                }
            }
            assert_relative_eq!(g_upper(3, a), u3 / m as f64, max_relative = 1e-6);
            assert_relative_eq!(g_lower(3, a), l3 / m as f64, max_relative = 2e-3);
        }
    }
}
