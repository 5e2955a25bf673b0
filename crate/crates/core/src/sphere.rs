//! Finite direction sets on the unit sphere used for sup/inf over directions
//! and for angular averages.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    dim: usize,
    /// Row-major `len x dim` unit vectors.
    points: Vec<f64>,
}

impl SphereGrid {
    /// Default resolution: both poles in 1d, 256 equispaced angles in 2d,
    /// a 2000 point Fibonacci lattice in 3d.
    pub fn new(dim: usize) -> Self {
        match dim {
            1 => Self::with_resolution(1, 2),
            2 => Self::with_resolution(2, 256),
            _ => Self::with_resolution(dim, 2000),
        }
    }

    pub fn with_resolution(dim: usize, m: usize) -> Self {
        assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
        let mut points = Vec::new();
        match dim {
            1 => points.extend_from_slice(&[1.0, -1.0]),
            2 => {
                for j in 0..m {
                    let th = 2.0 * PI * j as f64 / m as f64;
                    points.push(th.cos());
                    points.push(th.sin());
                }
                // exact axes so axis-aligned degeneracies are hit exactly
                for v in points.iter_mut() {
                    if v.abs() < 1e-15 {
                        *v = 0.0;
                    }
                }
            }
            _ => {
                let golden = PI * (3.0 - 5f64.sqrt());
                for j in 0..m {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * j as f64;
                    points.extend_from_slice(&[r * th.cos(), r * th.sin(), z]);
                }
            }
        }
        SphereGrid { dim, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.dim)
    }
}
