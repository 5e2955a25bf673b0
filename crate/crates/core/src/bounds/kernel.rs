use super::KernelShape;
use crate::decomposition::{inverse_factorials, truncation_order, weighted_power_sum};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::measure::{crop, embed, FiniteMeasure};
use num_complex::Complex64;
use rayon::prelude::*;

/// `sum_m (1/m!) \int sigma h((x - y) zeta) Q^{*m}(dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundKernelParams {
    pub sigma: f64,
    pub shape: KernelShape,
    pub zeta: f64,
    pub q: FiniteMeasure,
    /// Truncation of the series in `m`.
    pub eps_tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    /// Truncated series.
    pub value: f64,
    /// Bound on what the truncation and the grid leave out.
    pub remainder: f64,
    pub order: usize,
}

/// `S = sum_{m <= M} Q^{*m} / m!` on the grid of `Q`, negative ringing
/// dropped (which only raises an upper bound), and the mass `S` misses.
fn series(q: &FiniteMeasure, eps_tail: f64) -> Result<(FiniteMeasure, usize, f64)> {
    let (order, tail) = truncation_order(q.total_mass(), eps_tail);
    let mut s = weighted_power_sum(q, &inverse_factorials(order))?;
    for v in s.masses.iter_mut() {
        *v = v.max(0.0);
    }
    let missing = tail + s.outside_mass.max(0.0);
    Ok((s, order, missing))
}

fn check(sigma: f64, zeta: f64, shape: &KernelShape) -> Result<()> {
    if !(sigma > 0.0 && zeta > 0.0) {
        return Err(Error::InvalidArgument("sigma and zeta must be positive".into()));
    }
    shape.validate()
}

pub fn eval_compound_kernel(params: &CompoundKernelParams, x: &[f64]) -> Result<KernelValue> {
    check(params.sigma, params.zeta, &params.shape)?;
    if x.len() != params.q.grid.dim {
        return Err(Error::GridMismatch(format!("point has {} coordinates", x.len())));
    }
    let (s, order, missing) = series(&params.q, params.eps_tail)?;
    let g = s.grid;
    let value: f64 = s
        .masses
        .par_iter()
        .enumerate()
        .filter(|(_, m)| **m != 0.0)
        .map(|(i, m)| {
            let y = g.point(i);
            let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            m * params.shape.value(d * params.zeta)
        })
        .sum();
    Ok(KernelValue {
        value: params.sigma * value,
        remainder: params.sigma * params.shape.sup() * missing,
        order,
    })
}

/// The series `S` of one `Q`, kept in transformed form so the compound
/// kernel of any shape can be laid on a window by one FFT pair.
///
/// `Q` lives on a grid twice as wide as the window; the product is taken
/// on a grid twice as wide again so no kernel values wrap around.
#[derive(Debug, Clone)]
pub struct KernelField {
    pub grid: GridSpec,
    pub order: usize,
    /// Mass of the full series that `S` does not carry.
    pub missing: f64,
    padded: GridSpec,
    spectrum: Vec<Complex64>,
}

impl KernelField {
    pub fn new(q: &FiniteMeasure, eps_tail: f64) -> Result<Self> {
        let (s, order, missing) = series(q, eps_tail)?;
        let padded = s.grid.widened(2)?;
        let spectrum = padded.real_to_spectral(&embed(&s.grid, &s.masses)?);
        Ok(KernelField {
            grid: s.grid,
            order,
            missing,
            padded,
            spectrum,
        })
    }

    /// Total mass of `S`.
    pub fn mass(&self) -> f64 {
        // frequency index N/2 is zero
        self.spectrum[self.padded.origin_index()].re
    }

    /// Compound kernel on the nodes of `window`, which must be the central
    /// half of the series grid. The truncated series, without remainder.
    pub fn on_window(&self, shape: &KernelShape, sigma: f64, zeta: f64, window: &GridSpec) -> Result<Vec<f64>> {
        check(sigma, zeta, shape)?;
        if !window.widened(2)?.same_nodes(&self.grid) {
            return Err(Error::GridMismatch("window is not the centre of the kernel grid".into()));
        }
        let p = self.padded;
        let h: Vec<f64> = (0..p.len())
            .into_par_iter()
            .map(|i| {
                let r = p.point(i).iter().map(|c| c * c).sum::<f64>().sqrt();
                shape.value(r * zeta)
            })
            .collect();
        let hs = p.real_to_spectral(&h);
        let prod: Vec<Complex64> = hs.par_iter().zip(&self.spectrum).map(|(a, b)| a * b).collect();
        let full: Vec<f64> = p.to_spatial(prod).into_iter().map(|z| sigma * z.re).collect();
        let mid = crop(&self.grid, &full);
        Ok(crop(window, &mid))
    }

    pub fn remainder(&self, shape: &KernelShape, sigma: f64) -> f64 {
        sigma * shape.sup() * self.missing
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::KernelShape;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn shape() -> KernelShape {
        KernelShape::ExpDecay { b1: 2.0, b2: 1.5 }
    }

    #[test]
    fn zero_measure_leaves_the_m0_term() {
        let g = GridSpec::new(2, 4.0, 16).unwrap();
        let p = CompoundKernelParams {
            sigma: 3.0,
            shape: shape(),
            zeta: 0.5,
            q: FiniteMeasure::zero(g),
            eps_tail: 1e-10,
        };
        let x = [0.7, -1.1];
        let v = eval_compound_kernel(&p, &x).unwrap();
        assert_relative_eq!(v.value, 3.0 * shape().value(0.5 * (0.49f64 + 1.21).sqrt()), max_relative = 1e-14);
        assert_eq!(v.order, 0);
        assert_eq!(v.remainder, 0.0);
    }

    #[test]
    fn single_atom_closed_form() {
        let g = GridSpec::new(1, 16.0, 256).unwrap();
        let h = g.spacing();
        let (w, y0) = (0.8, 4.0 * h);
        let q = FiniteMeasure::from_atoms(g, &[(vec![y0], w)]).unwrap();
        let p = CompoundKernelParams {
            sigma: 1.0,
            shape: shape(),
            zeta: 1.0,
            q,
            eps_tail: 1e-12,
        };
        let x = 0.3;
        let v = eval_compound_kernel(&p, &[x]).unwrap();
        let mut exact = 0.0;
        let mut c = 1.0;
        for m in 0..60 {
            exact += c * shape().value((x - m as f64 * y0).abs());
            c *= w / (m + 1) as f64;
        }
        assert!((v.value - exact).abs() <= v.remainder + 1e-13, "{} {}", v.value, exact);
    }

    #[test]
    fn field_matches_pointwise() {
        let ext = GridSpec::new(1, 8.0, 128).unwrap();
        let window = GridSpec::new(1, 4.0, 64).unwrap();
        let h = ext.spacing();
        let q = FiniteMeasure::from_atoms(ext, &[(vec![10.0 * h], 0.5), (vec![-7.0 * h], 0.3)]).unwrap();
        let f = KernelField::new(&q, 1e-12).unwrap();
        // high powers walk off the grid; that mass is accounted as missing
        assert_relative_eq!(f.mass() + f.missing, (0.8f64).exp(), max_relative = 1e-10);
        let vals = f.on_window(&shape(), 1.3, 0.9, &window).unwrap();
        let p = CompoundKernelParams {
            sigma: 1.3,
            shape: shape(),
            zeta: 0.9,
            q,
            eps_tail: 1e-12,
        };
        for j in (0..64).step_by(9) {
            let v = eval_compound_kernel(&p, &[window.coord(j)]).unwrap();
            assert_relative_eq!(vals[j], v.value, max_relative = 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn partial_sums_grow_with_order(w in 0.05f64..3.0, k in 1usize..6, x in -3.0f64..3.0) {
            let g = GridSpec::new(1, 16.0, 128).unwrap();
            let y0 = k as f64 * g.spacing();
            let q = FiniteMeasure::from_atoms(g, &[(vec![y0], w)]).unwrap();
            let mut last = 0.0;
            for eps in [1e-1, 1e-3, 1e-6, 1e-9] {
                let p = CompoundKernelParams { sigma: 1.0, shape: shape(), zeta: 1.0, q: q.clone(), eps_tail: eps };
                let v = eval_compound_kernel(&p, &[x]).unwrap().value;
                prop_assert!(v >= last - 1e-14);
                last = v;
            }
        }

        #[test]
        fn m0_term_is_radially_monotone(r1 in 0.0f64..5.0, dr in 0.0f64..5.0, th in 0.0f64..6.3) {
            let g = GridSpec::new(2, 4.0, 8).unwrap();
            let p = CompoundKernelParams { sigma: 1.0, shape: shape(), zeta: 1.0, q: FiniteMeasure::zero(g), eps_tail: 1e-10 };
            let a = eval_compound_kernel(&p, &[r1, 0.0]).unwrap().value;
            let r2 = r1 + dr;
            let b = eval_compound_kernel(&p, &[r2 * th.cos(), r2 * th.sin()]).unwrap().value;
            prop_assert!(a >= b - 1e-15);
        }
    }
}
