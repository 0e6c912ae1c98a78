//! Node-wise metrics on the fiber chart and the operators built from them.

use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::grid::FiberGrid;
use super::ops::{check_grid, diff_stencil, grad_at};
use crate::error::{Error, Result};
use crate::warp::WarpingFunction;

/// Symmetric matrix of size 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat {
    pub n: usize,
    pub a: [[f64; 2]; 2],
}

impl SymMat {
    pub fn identity(n: usize) -> Self {
        Self::diag(n, [1.0, 1.0])
    }

    pub fn diag(n: usize, d: [f64; 2]) -> Self {
        let mut a = [[0.0; 2]; 2];
        a[0][0] = d[0];
        if n == 2 {
            a[1][1] = d[1];
        }
        Self { n, a }
    }

    /// `v vᵀ + s·diag(d)`
    pub fn rank_one_plus_diag(n: usize, v: [f64; 2], s: f64, d: [f64; 2]) -> Self {
        let mut a = [[0.0; 2]; 2];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = v[i] * v[j];
            }
            a[i][i] += s * d[i];
        }
        Self { n, a }
    }

    pub fn scale(mut self, s: f64) -> Self {
        for row in self.a.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        self
    }

    pub fn det(&self) -> f64 {
        if self.n == 1 {
            self.a[0][0]
        } else {
            self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a[0][0] > 0.0 && self.det() > 0.0 && self.det().is_finite()
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let mut a = [[0.0; 2]; 2];
        if self.n == 1 {
            a[0][0] = 1.0 / d;
        } else {
            a[0][0] = self.a[1][1] / d;
            a[1][1] = self.a[0][0] / d;
            a[0][1] = -self.a[0][1] / d;
            a[1][0] = -self.a[1][0] / d;
        }
        Some(Self { n: self.n, a })
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        let mut r = [0.0; 2];
        for (i, ri) in r.iter_mut().enumerate().take(self.n) {
            *ri = (0..self.n).map(|j| self.a[i][j] * v[j]).sum();
        }
        r
    }

    pub fn quad_form(&self, v: [f64; 2]) -> f64 {
        let w = self.mul_vec(v);
        (0..self.n).map(|i| v[i] * w[i]).sum()
    }

    /// Ascending eigenvalues (the second entry repeats the first when n = 1).
    pub fn eigenvalues(&self) -> [f64; 2] {
        if self.n == 1 {
            return [self.a[0][0]; 2];
        }
        let m = 0.5 * (self.a[0][0] + self.a[1][1]);
        let h = 0.5 * (self.a[0][0] - self.a[1][1]);
        let d = h.hypot(self.a[0][1]);
        let hi = m + d;
        // product form keeps the small eigenvalue accurate
        let lo = if hi != 0.0 { self.det() / hi } else { m - d };
        [lo.min(hi), hi.max(lo)]
    }

    /// Eigenvalues of `self` relative to the positive-definite `b`, i.e. the
    /// roots of `det(self − λ b) = 0`, via the Cholesky factor of `b`.
    pub fn generalized_eigenvalues(&self, b: &SymMat) -> Option<[f64; 2]> {
        if !b.is_positive_definite() {
            return None;
        }
        if self.n == 1 {
            let l = self.a[0][0] / b.a[0][0];
            return Some([l, l]);
        }
        let l11 = b.a[0][0].sqrt();
        let l21 = b.a[1][0] / l11;
        let l22 = (b.a[1][1] - l21 * l21).sqrt();
        // C = L⁻¹ A L⁻ᵀ
        let (a11, a12, a22) = (self.a[0][0], self.a[0][1], self.a[1][1]);
        let c11 = a11 / (l11 * l11);
        let c12 = (a12 - l21 * a11 / l11) / (l11 * l22);
        let c22 = (a22 - 2.0 * l21 * a12 / l11 + l21 * l21 * a11 / (l11 * l11)) / (l22 * l22);
        let c = SymMat {
            n: 2,
            a: [[c11, c12], [c12, c22]],
        };
        Some(c.eigenvalues())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricTag {
    FiberG,
    GraphGu,
    ConformalGhat,
    WarpedBase,
}

/// Which metric the chart carries.
#[derive(Debug, Clone, Copy)]
pub enum MetricKind<'a> {
    /// The fiber metric `g`.
    Fiber,
    /// Induced graph metric `g_u = du² + f(u)² g`.
    Graph {
        u: &'a ScalarField,
        f: &'a WarpingFunction,
    },
    /// `ĝ = g_u / f(u)²`.
    Conformal {
        u: &'a ScalarField,
        f: &'a WarpingFunction,
    },
    /// 2-D base `g₁₁ dx² + φ(x)² g₂₂ dy²`.
    WarpedBase { phi: &'a WarpingFunction },
}

impl MetricKind<'_> {
    pub fn tag(&self) -> MetricTag {
        match self {
            MetricKind::Fiber => MetricTag::FiberG,
            MetricKind::Graph { .. } => MetricTag::GraphGu,
            MetricKind::Conformal { .. } => MetricTag::ConformalGhat,
            MetricKind::WarpedBase { .. } => MetricTag::WarpedBase,
        }
    }
}

/// Fail with a range error if any node value leaves the domain of `f`.
pub fn check_range(u: &ScalarField, f: &WarpingFunction) -> Result<()> {
    let dom = f.domain();
    let mut bad = u.values().iter().enumerate().filter(|(_, v)| !dom.contains(**v));
    if let Some((first, &value)) = bad.next() {
        return Err(Error::Range {
            count: 1 + bad.count(),
            first,
            value,
        });
    }
    Ok(())
}

fn validate(grid: &FiberGrid, kind: &MetricKind) -> Result<()> {
    match kind {
        MetricKind::Fiber => Ok(()),
        MetricKind::Graph { u, f } | MetricKind::Conformal { u, f } => {
            check_grid(grid, u.grid())?;
            check_range(u, f)
        }
        MetricKind::WarpedBase { phi } => {
            if grid.dim() != 2 {
                return Err(Error::Grid("warped base metric needs a 2-D grid".into()));
            }
            let dom = phi.domain();
            for p in 0..grid.len() {
                let x = grid.coord(p)[0];
                if !dom.contains(x) {
                    return Err(Error::Range {
                        count: 1,
                        first: p,
                        value: x,
                    });
                }
            }
            Ok(())
        }
    }
}

fn node_matrix(grid: &FiberGrid, kind: &MetricKind, node: usize) -> SymMat {
    let n = grid.dim();
    let g = [grid.metric_entry(0), grid.metric_entry(1)];
    match kind {
        MetricKind::Fiber => SymMat::diag(n, g),
        MetricKind::Graph { u, f } | MetricKind::Conformal { u, f } => {
            let du = grad_at(grid, u.values(), node);
            let fu = f.value(u.values()[node]);
            let m = SymMat::rank_one_plus_diag(n, du, fu * fu, g);
            if matches!(kind, MetricKind::Conformal { .. }) {
                m.scale(1.0 / (fu * fu))
            } else {
                m
            }
        }
        MetricKind::WarpedBase { phi } => {
            let p = phi.value(grid.coord(node)[0]);
            SymMat::diag(2, [g[0], p * p * g[1]])
        }
    }
}

fn checked(node: usize, m: SymMat) -> Result<SymMat> {
    if m.is_positive_definite() {
        Ok(m)
    } else {
        Err(Error::SingularMetric { node, det: m.det() })
    }
}

pub fn metric_matrix(grid: &FiberGrid, kind: &MetricKind, node: usize) -> Result<SymMat> {
    validate(grid, kind)?;
    if node >= grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: node + 1,
        });
    }
    checked(node, node_matrix(grid, kind, node))
}

/// Metric matrices at every node.
pub fn metric_field(grid: &FiberGrid, kind: &MetricKind) -> Result<Vec<SymMat>> {
    validate(grid, kind)?;
    (0..grid.len())
        .map(|p| checked(p, node_matrix(grid, kind, p)))
        .collect()
}

/// `G^{ij} ∂ᵢφ ∂ⱼφ` at every node.
pub fn grad_norm_sq(grid: &FiberGrid, kind: &MetricKind, phi: &ScalarField) -> Result<ScalarField> {
    check_grid(grid, phi.grid())?;
    let ms = metric_field(grid, kind)?;
    let vals = ms
        .iter()
        .enumerate()
        .map(|(p, m)| {
            let inv = m.inverse().ok_or(Error::SingularMetric { node: p, det: m.det() })?;
            Ok(inv.quad_form(grad_at(grid, phi.values(), p)).max(0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(*grid, vals)
}

/// `(1/√det G) ∂ᵢ(√det G G^{ij} ∂ⱼφ)` with the grid's derivative stencils.
pub fn laplace_beltrami(
    grid: &FiberGrid,
    kind: &MetricKind,
    phi: &ScalarField,
) -> Result<ScalarField> {
    check_grid(grid, phi.grid())?;
    let ms = metric_field(grid, kind)?;
    let n = grid.dim();
    let mut flux = vec![0.0; n * grid.len()];
    let mut sqrt_det = vec![0.0; grid.len()];
    for (p, m) in ms.iter().enumerate() {
        let inv = m.inverse().ok_or(Error::SingularMetric { node: p, det: m.det() })?;
        let s = m.det().sqrt();
        sqrt_det[p] = s;
        let j = inv.mul_vec(grad_at(grid, phi.values(), p));
        for k in 0..n {
            flux[p * n + k] = s * j[k];
        }
    }
    let vals = (0..grid.len())
        .map(|p| {
            let mut d = 0.0;
            for k in 0..n {
                for &(q, c) in diff_stencil(grid, p, k).iter() {
                    d += c * flux[q * n + k];
                }
            }
            d / sqrt_det[p]
        })
        .collect();
    ScalarField::new(*grid, vals)
}

/// Range of generalized eigenvalues of metric A relative to metric B over
/// all nodes.
pub fn metric_eigen_bounds(
    grid: &FiberGrid,
    a: &MetricKind,
    b: &MetricKind,
) -> Result<(f64, f64)> {
    let ma = metric_field(grid, a)?;
    let mb = metric_field(grid, b)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (p, (x, y)) in ma.iter().zip(&mb).enumerate() {
        let [l0, l1] = x
            .generalized_eigenvalues(y)
            .ok_or(Error::SingularMetric { node: p, det: y.det() })?;
        lo = lo.min(l0);
        hi = hi.max(l1);
    }
    Ok((lo, hi))
}
