//! One-dimensional quadrature: adaptive Gauss-Kronrod (7/15) on finite
//! intervals, geometric panelling for half-lines and the origin, and
//! Gauss-Legendre nodes for fixed composite rules.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Absolute and relative tolerance pair; an estimate is accepted when its
/// error is below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
}

impl Tol {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tol { abs, rel }
    }
    fn target(&self, v: f64) -> f64 {
        self.abs.max(self.rel * v.abs())
    }
}

impl Default for Tol {
    fn default() -> Self {
        Tol::new(1e-14, 1e-11)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

/// Single 15-point Kronrod panel. Returns (value, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (v, e, _) = gk15_abs(f, a, b);
    (v, e)
}

/// As [`gk15`], also returning the Kronrod estimate of `\int |f|`.
fn gk15_abs<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut ra = fc.abs() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        let s = f1 + f2;
        rk += WGK[j] * s;
        ra += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    let val = rk * h;
    let resabs = (ra * h).abs();
    // errors below the rounding level of the panel are not resolvable
    let err = ((rk - rg) * h).abs().max(ROUNDOFF * resabs);
    (val, err, resabs)
}

const ROUNDOFF: f64 = 50.0 * f64::EPSILON;

struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss-Kronrod on `[a, b]`.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            abs_err: 0.0,
        });
    }
    let (v, e, ra) = gk15_abs(&f, a, b);
    if !v.is_finite() {
        return Err(Error::QuadratureFailure {
            achieved: f64::INFINITY,
            requested: tol.target(0.0),
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, val: v, err: e, abs: ra });
    let (mut total, mut err, mut resabs) = (v, e, ra);
    let mut iters = 0;
    while err > tol.target(total).max(2.0 * ROUNDOFF * resabs) {
        iters += 1;
        let p = heap.pop().expect("heap never empty");
        if iters > 4000 || (p.b - p.a).abs() < 1e-15 * (p.a.abs() + p.b.abs()) {
            return Err(Error::QuadratureFailure {
                achieved: err,
                requested: tol.target(total),
            });
        }
        let m = 0.5 * (p.a + p.b);
        let (v1, e1, a1) = gk15_abs(&f, p.a, m);
        let (v2, e2, a2) = gk15_abs(&f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        resabs += a1 + a2 - p.abs;
        heap.push(Panel { a: p.a, b: m, val: v1, err: e1, abs: a1 });
        heap.push(Panel { a: m, b: p.b, val: v2, err: e2, abs: a2 });
        if !total.is_finite() {
            return Err(Error::QuadratureFailure {
                achieved: f64::INFINITY,
                requested: tol.target(0.0),
            });
        }
    }
    // recompute from the panels to shed accumulated rounding
    let value: f64 = heap.iter().map(|p| p.val).sum();
    let abs_err: f64 = heap.iter().map(|p| p.err).sum();
    Ok(Estimate { value, abs_err })
}

/// `\int_a^inf f` for `a > 0` by doubling panels `[a 2^k, a 2^{k+1}]`.
/// Stops once three consecutive panels are negligible.
pub fn to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tol) -> Result<Estimate> {
    assert!(a > 0.0);
    let mut lo = a;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut quiet = 0;
    for _ in 0..1100 {
        let hi = 2.0 * lo;
        let e = adaptive(&f, lo, hi, Tol::new(tol.abs * 0.01, tol.rel * 0.1))?;
        total += e.value;
        err += e.abs_err;
        if e.value.abs() <= 0.1 * tol.target(total) {
            quiet += 1;
            if quiet >= 3 {
                return Ok(Estimate { value: total, abs_err: err });
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        if !lo.is_finite() {
            break;
        }
    }
    Err(Error::QuadratureFailure {
        achieved: f64::INFINITY,
        requested: tol.target(total),
    })
}

/// `\int_0^b f` for `b > 0` by halving panels towards the origin, for
/// integrands with an integrable singularity at 0.
pub fn from_zero<F: Fn(f64) -> f64>(f: F, b: f64, tol: Tol) -> Result<Estimate> {
    assert!(b > 0.0);
    let mut hi = b;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut quiet = 0;
    for _ in 0..1000 {
        let lo = 0.5 * hi;
        let e = adaptive(&f, lo, hi, Tol::new(tol.abs * 0.01, tol.rel * 0.1))?;
        total += e.value;
        err += e.abs_err;
        if e.value.abs() <= 1e-3 * tol.target(total) {
            quiet += 1;
            if quiet >= 3 {
                return Ok(Estimate { value: total, abs_err: err });
            }
        } else {
            quiet = 0;
        }
        hi = lo;
    }
    Err(Error::QuadratureFailure {
        achieved: f64::INFINITY,
        requested: tol.target(total),
    })
}

/// Nodes and weights of the `m`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_exact_for_polynomials() {
        let (v, _) = gk15(&|x: f64| x.powi(20) + 3.0 * x.powi(7), -1.0, 2.0);
        let exact = (2f64.powi(21) + 1.0) / 21.0 + 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert_relative_eq!(v, exact, max_relative = 1e-13);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let e = adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tol::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert_relative_eq!(e.value, exact, max_relative = 1e-10);
    }

    #[test]
    fn half_lines() {
        let e = to_infinity(|x: f64| x.powf(-1.5), 2.0, Tol::default()).unwrap();
        assert_relative_eq!(e.value, 2.0 / 2f64.sqrt(), max_relative = 1e-9);
        let e = from_zero(|x: f64| x.powf(-0.5), 4.0, Tol::default()).unwrap();
        assert_relative_eq!(e.value, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn legendre_rule() {
        for m in [1usize, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(m);
            let s: f64 = w.iter().sum();
            assert_relative_eq!(s, 2.0, max_relative = 1e-13);
            let d = (2 * m - 2) as i32;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d)).sum();
            assert_relative_eq!(q, 2.0 / (d as f64 + 1.0), max_relative = 1e-12);
        }
    }
}
