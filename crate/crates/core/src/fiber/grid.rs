use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Flat torus.
    Periodic,
    /// Closed box; nodes sit on the boundary.
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Boundary values are data; solvers hold them fixed.
    Dirichlet,
    /// Boundary values are unknowns differentiated one-sidedly (diagnostics only).
    OneSided,
}

/// Uniform grid on a flat fiber of dimension 1 or 2 with a constant diagonal
/// metric. Nodes are ordered row-major with x fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberGrid {
    dim: usize,
    topology: Topology,
    boundary: BoundaryPolicy,
    origin: [f64; 2],
    extents: [f64; 2],
    counts: [usize; 2],
    metric: [f64; 2],
}

pub const MIN_COUNT: usize = 4;

impl FiberGrid {
    fn build(
        dim: usize,
        topology: Topology,
        origin: &[f64],
        extents: &[f64],
        counts: &[usize],
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Grid(format!("dimension {dim} not supported (1 or 2)")));
        }
        if origin.len() != dim || extents.len() != dim || counts.len() != dim {
            return Err(Error::Grid(format!(
                "expected {dim} entries per axis, got origin {}, extents {}, counts {}",
                origin.len(),
                extents.len(),
                counts.len()
            )));
        }
        let mut o = [0.0; 2];
        let mut e = [1.0; 2];
        let mut c = [1usize; 2];
        for k in 0..dim {
            if !(extents[k] > 0.0) || !extents[k].is_finite() {
                return Err(Error::Grid(format!("extent {} must be positive", extents[k])));
            }
            if counts[k] < MIN_COUNT {
                return Err(Error::Grid(format!(
                    "axis {k} has {} nodes; at least {MIN_COUNT} required",
                    counts[k]
                )));
            }
            if !origin[k].is_finite() {
                return Err(Error::Grid("origin must be finite".into()));
            }
            o[k] = origin[k];
            e[k] = extents[k];
            c[k] = counts[k];
        }
        Ok(Self {
            dim,
            topology,
            boundary: BoundaryPolicy::Dirichlet,
            origin: o,
            extents: e,
            counts: c,
            metric: [1.0, 1.0],
        })
    }

    /// Flat torus `[0, L_x) × [0, L_y)`.
    pub fn periodic(extents: &[f64], counts: &[usize]) -> Result<Self> {
        let origin = vec![0.0; extents.len()];
        Self::build(extents.len(), Topology::Periodic, &origin, extents, counts)
    }

    /// Closed box `origin + [0, L]` per axis with Dirichlet policy.
    pub fn bounded(origin: &[f64], extents: &[f64], counts: &[usize]) -> Result<Self> {
        Self::build(extents.len(), Topology::Bounded, origin, extents, counts)
    }

    /// Unit torus with `count` nodes per axis.
    pub fn unit_torus(dim: usize, count: usize) -> Result<Self> {
        Self::periodic(&vec![1.0; dim], &vec![count; dim])
    }

    pub fn with_boundary(mut self, policy: BoundaryPolicy) -> Self {
        self.boundary = policy;
        self
    }

    pub fn with_origin(mut self, origin: &[f64]) -> Result<Self> {
        if origin.len() != self.dim || origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("origin must have one finite entry per axis".into()));
        }
        self.origin[..self.dim].copy_from_slice(origin);
        Ok(self)
    }

    /// Constant diagonal fiber metric `g = diag(g_1, …, g_n)`.
    pub fn with_fiber_metric(mut self, diag: &[f64]) -> Result<Self> {
        if diag.len() != self.dim {
            return Err(Error::Grid(format!("fiber metric needs {} entries", self.dim)));
        }
        if diag.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Grid("fiber metric entries must be positive".into()));
        }
        self.metric[..self.dim].copy_from_slice(diag);
        Ok(self)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn topology(&self) -> Topology {
        self.topology
    }

    #[inline]
    pub fn is_periodic(&self) -> bool {
        self.topology == Topology::Periodic
    }

    pub fn boundary(&self) -> BoundaryPolicy {
        self.boundary
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dim]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.dim]
    }

    #[inline]
    pub fn count(&self, axis: usize) -> usize {
        self.counts[axis]
    }

    /// Fiber metric diagonal.
    pub fn fiber_metric(&self) -> &[f64] {
        &self.metric[..self.dim]
    }

    #[inline]
    pub fn metric_entry(&self, axis: usize) -> f64 {
        self.metric[axis]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self, axis: usize) -> f64 {
        match self.topology {
            Topology::Periodic => self.extents[axis] / self.counts[axis] as f64,
            Topology::Bounded => self.extents[axis] / (self.counts[axis] - 1) as f64,
        }
    }

    /// Largest spacing over the axes.
    pub fn h(&self) -> f64 {
        (0..self.dim).map(|k| self.spacing(k)).fold(0.0, f64::max)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.counts[0] + i
    }

    #[inline]
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.counts[0], node / self.counts[0])
    }

    pub fn coord(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.ij(node);
        let x = self.origin[0] + i as f64 * self.spacing(0);
        let y = if self.dim == 2 {
            self.origin[1] + j as f64 * self.spacing(1)
        } else {
            0.0
        };
        [x, y]
    }

    /// Index along `axis` of a node.
    #[inline]
    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        let (i, j) = self.ij(node);
        if axis == 0 {
            i
        } else {
            j
        }
    }

    /// Neighbour at `offset` steps along `axis`; wraps on a torus, `None`
    /// past the edge of a box.
    #[inline]
    pub fn shift(&self, node: usize, axis: usize, offset: isize) -> Option<usize> {
        let (i, j) = self.ij(node);
        let (k, n) = if axis == 0 {
            (i as isize, self.counts[0] as isize)
        } else {
            (j as isize, self.counts[1] as isize)
        };
        let m = k + offset;
        let m = match self.topology {
            Topology::Periodic => m.rem_euclid(n),
            Topology::Bounded if m < 0 || m >= n => return None,
            Topology::Bounded => m,
        } as usize;
        Some(if axis == 0 { self.index(m, j) } else { self.index(i, m) })
    }

    #[inline]
    pub fn wrap(&self, node: usize, axis: usize, offset: isize) -> usize {
        self.shift(node, axis, offset).expect("neighbour inside grid")
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        if self.is_periodic() {
            return false;
        }
        (0..self.dim).any(|k| {
            let i = self.axis_index(node, k);
            i == 0 || i + 1 == self.counts[k]
        })
    }

    /// Quadrature weight of the node for the fiber measure `dμ_g`
    /// (trapezoid on boxes).
    pub fn cell_measure(&self, node: usize) -> f64 {
        let mut w = 1.0;
        for k in 0..self.dim {
            let mut hk = self.spacing(k);
            if !self.is_periodic() {
                let i = self.axis_index(node, k);
                if i == 0 || i + 1 == self.counts[k] {
                    hk *= 0.5;
                }
            }
            w *= hk * self.metric[k].sqrt();
        }
        w
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|p| self.cell_measure(p)).collect()
    }

    /// Total fiber measure.
    pub fn measure(&self) -> f64 {
        (0..self.dim)
            .map(|k| self.extents[k] * self.metric[k].sqrt())
            .product()
    }

    pub fn same_shape(&self, other: &FiberGrid) -> bool {
        self.dim == other.dim && self.counts == other.counts && self.topology == other.topology
    }
}
