//! Uniform grids on `[-R, R)^n` and the centred discrete Fourier pair used
//! by every density and convolution routine.
//!
//! Nodes are `x_j = -R + j h` with `h = 2R/N`, frequencies are
//! `xi_k = (k - N/2) dxi` with `dxi = pi / R`. With these phases
//!
//! ```text
//! to_spectral:  F_k = sum_j f_j exp(+i xi_k . x_j)
//! to_spatial:   f_j = N^{-n} sum_k F_k exp(-i xi_k . x_j)
//! ```
//!
//! are exact inverses, and multiplying spectra is circular convolution of
//! node masses.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    /// Half-width `R`.
    pub extent: f64,
    /// Points per axis, a power of two, at least 4.
    pub points: usize,
}

impl GridSpec {
    pub fn new(dim: usize, extent: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("grid dimension {dim} not in 1..=3")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid extent must be positive, got {extent}")));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be a power of two >= 4, got {points}"
            )));
        }
        Ok(GridSpec { dim, extent, points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency step `pi / R`.
    pub fn freq_step(&self) -> f64 {
        PI / self.extent
    }

    /// Largest frequency magnitude per axis, `pi / h`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.extent + j as f64 * self.spacing()
    }

    pub fn freq(&self, k: usize) -> f64 {
        (k as f64 - (self.points / 2) as f64) * self.freq_step()
    }

    /// Multi-index of a flat row-major index.
    pub fn unflatten(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for d in (0..self.dim).rev() {
            out[d] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn flatten(&self, ix: &[usize]) -> usize {
        ix.iter().take(self.dim).fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let ix = self.unflatten(idx);
        (0..self.dim).map(|d| self.coord(ix[d])).collect()
    }

    pub fn frequency(&self, idx: usize) -> Vec<f64> {
        let ix = self.unflatten(idx);
        (0..self.dim).map(|d| self.freq(ix[d])).collect()
    }

    /// Index of the node at the origin (it always exists: `N/2`).
    pub fn origin_index(&self) -> usize {
        self.flatten(&[self.points / 2; 3])
    }

    /// Same spacing, `factor` times the extent.
    pub fn widened(&self, factor: usize) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.extent * factor as f64, self.points * factor)
    }

    /// Same extent, `factor` times as many points.
    pub fn refined(&self, factor: usize) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.extent, self.points * factor)
    }

    pub fn same_nodes(&self, other: &GridSpec) -> bool {
        self.dim == other.dim
            && self.points == other.points
            && (self.extent - other.extent).abs() <= 1e-12 * self.extent
    }

    /// Evaluates `f` at every frequency. On the Nyquist planes the two
    /// aliases `+-pi/h` are averaged so real inputs give real outputs.
    pub fn eval_spectrum<F>(&self, f: F) -> Result<Vec<Complex64>>
    where
        F: Fn(&[f64]) -> Result<Complex64> + Sync,
    {
        let n = self.points;
        let dim = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        out.par_chunks_mut(n).enumerate().try_for_each(|(row, chunk)| {
            let mut xi = vec![0.0; dim];
            let base = self.unflatten(row * n);
            for (k, slot) in chunk.iter_mut().enumerate() {
                let mut ix = base;
                ix[dim - 1] = k;
                let nyq: Vec<usize> = (0..dim).filter(|&d| ix[d] == 0).collect();
                for d in 0..dim {
                    xi[d] = self.freq(ix[d]);
                }
                if nyq.is_empty() {
                    *slot = f(&xi)?;
                    continue;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for mask in 0..(1usize << nyq.len()) {
                    for (b, &d) in nyq.iter().enumerate() {
                        xi[d] = if mask >> b & 1 == 1 { -self.freq(0) } else { self.freq(0) };
                    }
                    acc += f(&xi)?;
                }
                *slot = acc / (1usize << nyq.len()) as f64;
            }
            Ok::<(), Error>(())
        })?;
        Ok(out)
    }

    /// As [`eval_spectrum`](Self::eval_spectrum) for `f` depending on `|xi|`
    /// only; each distinct radius is evaluated once.
    pub fn eval_radial_spectrum<F>(&self, f: F) -> Result<Vec<Complex64>>
    where
        F: Fn(f64) -> Result<Complex64> + Sync,
    {
        let half = (self.points / 2) as i64;
        let key = |idx: usize| -> usize {
            let ix = self.unflatten(idx);
            (0..self.dim).map(|d| ((ix[d] as i64 - half).pow(2)) as usize).sum()
        };
        let max_key = self.dim * (half * half) as usize;
        let mut used = vec![false; max_key + 1];
        for idx in 0..self.len() {
            used[key(idx)] = true;
        }
        let keys: Vec<usize> = (0..=max_key).filter(|&k| used[k]).collect();
        let step = self.freq_step();
        let vals: Vec<Complex64> = keys
            .par_iter()
            .map(|&k| f((k as f64).sqrt() * step))
            .collect::<Result<_>>()?;
        let mut table = vec![Complex64::new(0.0, 0.0); max_key + 1];
        for (k, v) in keys.iter().zip(vals) {
            table[*k] = v;
        }
        Ok((0..self.len()).into_par_iter().map(|i| table[key(i)]).collect())
    }

    /// `f_j = N^{-n} sum_k F_k exp(-i xi_k . x_j)`.
    pub fn to_spatial(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.check_len(spectrum.len());
        self.checkerboard(&mut spectrum);
        fft_nd(&mut spectrum, self.points, self.dim, FftDirection::Forward);
        self.checkerboard(&mut spectrum);
        let scale = 1.0 / self.len() as f64;
        spectrum.par_iter_mut().for_each(|v| *v *= scale);
        spectrum
    }

    /// `F_k = sum_j f_j exp(+i xi_k . x_j)`.
    pub fn to_spectral(&self, mut values: Vec<Complex64>) -> Vec<Complex64> {
        self.check_len(values.len());
        self.checkerboard(&mut values);
        fft_nd(&mut values, self.points, self.dim, FftDirection::Inverse);
        self.checkerboard(&mut values);
        values
    }

    pub fn real_to_spectral(&self, values: &[f64]) -> Vec<Complex64> {
        self.to_spectral(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    fn check_len(&self, len: usize) {
        assert_eq!(len, self.len(), "array does not match grid");
    }

    /// Multiplies entry `j` by `(-1)^{|j|}`; the phase of `x_0 = -R` (and of
    /// `xi_0 = -pi/h`) against the other variable.
    fn checkerboard(&self, data: &mut [Complex64]) {
        let n = self.points;
        let dim = self.dim;
        data.par_chunks_mut(n).enumerate().for_each(|(row, chunk)| {
            let ix = self.unflatten(row * n);
            let parity: usize = ix[..dim - 1].iter().sum::<usize>() & 1;
            for (k, v) in chunk.iter_mut().enumerate() {
                if (parity + k) & 1 == 1 {
                    *v = -*v;
                }
            }
        });
    }
}

/// In-place n-d FFT: transform the contiguous last axis, then rotate it to
/// the front; after `dim` rounds the layout is restored.
fn fft_nd(data: &mut Vec<Complex64>, n: usize, dim: usize, dir: FftDirection) {
    let fft = FftPlanner::new().plan_fft(n, dir);
    for _ in 0..dim {
        data.par_chunks_mut(n).for_each(|row| fft.process(row));
        if dim > 1 {
            *data = transpose(data, data.len() / n, n);
        }
    }
}

/// Row-major `(rows x cols)` to `(cols x rows)`.
fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    out.par_chunks_mut(rows).enumerate().for_each(|(c, chunk)| {
        for (r, v) in chunk.iter_mut().enumerate() {
            *v = data[r * cols + c];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn brute_spectral(g: &GridSpec, f: &[Complex64]) -> Vec<Complex64> {
        (0..g.len())
            .map(|k| {
                let xi = g.frequency(k);
                (0..g.len())
                    .map(|j| {
                        let x = g.point(j);
                        let ph: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
                        f[j] * Complex64::from_polar(1.0, ph)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_direct_sums() {
        for dim in 1..=3 {
            let g = GridSpec::new(dim, 1.7, 8).unwrap();
            let f: Vec<Complex64> = (0..g.len())
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let fast = g.to_spectral(f.clone());
            let slow = brute_spectral(&g, &f);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-10, "{dim}: {a} vs {b}");
            }
            let back = g.to_spatial(fast);
            for (a, b) in back.iter().zip(&f) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_spectrum_agrees_with_general() {
        let g = GridSpec::new(2, 3.0, 16).unwrap();
        let f = |s: f64| Ok(Complex64::new((-s).exp(), 0.0));
        let a = g.eval_radial_spectrum(f).unwrap();
        let b = g
            .eval_spectrum(|xi| Ok(Complex64::new((-(xi[0] * xi[0] + xi[1] * xi[1]).sqrt()).exp(), 0.0)))
            .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x.re, y.re, max_relative = 1e-13);
        }
    }

    #[test]
    fn origin_is_a_node() {
        for dim in 1..=3 {
            let g = GridSpec::new(dim, 2.0, 16).unwrap();
            assert!(g.point(g.origin_index()).iter().all(|&c| c == 0.0));
        }
    }
}
