use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::FiberGrid;
use crate::error::{Error, Result};

/// One value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: FiberGrid,
    values: Vec<f64>,
}

/// `n` components per node, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: FiberGrid,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl ScalarField {
    pub fn new(grid: FiberGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: FiberGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: FiberGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Sample `φ(x, y)` at the nodes.
    pub fn from_fn(grid: FiberGrid, phi: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|p| {
                let [x, y] = grid.coord(p);
                phi(x, y)
            })
            .collect();
        Self { grid, values }
    }

    /// Smooth seeded random field: a sum of low Fourier modes over the grid
    /// extents, rescaled so that `max |u| = amplitude`.
    pub fn random_smooth(grid: FiberGrid, amplitude: f64, modes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = modes.max(1) as i32;
        let mut terms = Vec::new();
        let ky_range = if grid.dim() == 2 { modes } else { 0 };
        for kx in 0..=modes {
            for ky in -ky_range..=ky_range {
                if kx == 0 && ky <= 0 {
                    continue;
                }
                let decay = 1.0 / (1.0 + (kx * kx + ky * ky) as f64);
                let a: f64 = rng.gen_range(-1.0..1.0) * decay;
                let b: f64 = rng.gen_range(-1.0..1.0) * decay;
                terms.push((kx as f64, ky as f64, a, b));
            }
        }
        let ext = grid.extents().to_vec();
        let ly = if grid.dim() == 2 { ext[1] } else { 1.0 };
        let origin = grid.origin().to_vec();
        let oy = if grid.dim() == 2 { origin[1] } else { 0.0 };
        let two_pi = std::f64::consts::TAU;
        let mut field = Self::from_fn(grid, |x, y| {
            let mut s = 0.0;
            for &(kx, ky, a, b) in &terms {
                let arg = two_pi * (kx * (x - origin[0]) / ext[0] + ky * (y - oy) / ly);
                s += a * arg.cos() + b * arg.sin();
            }
            s
        });
        let m = field.max_abs();
        if m > 0.0 {
            field.values.iter_mut().for_each(|v| *v *= amplitude / m);
        }
        field
    }

    #[inline]
    pub fn grid(&self) -> &FiberGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| g(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Unweighted node statistics (population standard deviation).
    pub fn stats(&self) -> FieldStats {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        let var = self.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        FieldStats {
            mean,
            std: var.sqrt(),
            min: self.min(),
            max: self.max(),
        }
    }

    /// `Σ w_p a_p b_p` with the grid's quadrature weights.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        (0..self.len())
            .map(|p| self.grid.cell_measure(p) * self.values[p] * other.values[p])
            .sum()
    }
}

impl VectorField {
    pub fn new(grid: FiberGrid, data: Vec<f64>) -> Result<Self> {
        let expected = grid.dim() * grid.len();
        if data.len() != expected {
            return Err(Error::Shape {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: FiberGrid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.dim() * grid.len()],
        }
    }

    pub fn from_fn(grid: FiberGrid, x: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let n = grid.dim();
        let mut data = Vec::with_capacity(n * grid.len());
        for p in 0..grid.len() {
            let [cx, cy] = grid.coord(p);
            data.extend_from_slice(&x(cx, cy)[..n]);
        }
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> &FiberGrid {
        &self.grid
    }

    #[inline]
    pub fn at(&self, node: usize) -> &[f64] {
        let n = self.grid.dim();
        &self.data[node * n..(node + 1) * n]
    }

    #[inline]
    pub fn at_mut(&mut self, node: usize) -> &mut [f64] {
        let n = self.grid.dim();
        &mut self.data[node * n..(node + 1) * n]
    }

    /// Component `k` at every node.
    pub fn component(&self, k: usize) -> Vec<f64> {
        let n = self.grid.dim();
        self.data.iter().skip(k).step_by(n).cloned().collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `Σ w_p g(X_p, Y_p)` using the fiber metric.
    pub fn inner(&self, other: &VectorField) -> f64 {
        let n = self.grid.dim();
        (0..self.grid.len())
            .map(|p| {
                let a = self.at(p);
                let b = other.at(p);
                let dot: f64 = (0..n).map(|k| self.grid.metric_entry(k) * a[k] * b[k]).sum();
                self.grid.cell_measure(p) * dot
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        let g = FiberGrid::unit_torus(2, 8).unwrap();
        assert!(matches!(
            ScalarField::new(g, vec![0.0; 63]),
            Err(Error::Shape { expected: 64, got: 63 })
        ));
        assert!(VectorField::new(g, vec![0.0; 128]).is_ok());
        assert!(VectorField::new(g, vec![0.0; 64]).is_err());
    }

    #[test]
    fn random_field_is_seeded_and_scaled() {
        let g = FiberGrid::unit_torus(2, 16).unwrap();
        let a = ScalarField::random_smooth(g, 0.3, 3, 7);
        let b = ScalarField::random_smooth(g, 0.3, 3, 7);
        let c = ScalarField::random_smooth(g, 0.3, 3, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.max_abs() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn stats_of_constant() {
        let g = FiberGrid::unit_torus(1, 8).unwrap();
        let s = ScalarField::constant(g, 2.5).stats();
        assert_eq!((s.mean, s.std, s.min, s.max), (2.5, 0.0, 2.5, 2.5));
    }
}
