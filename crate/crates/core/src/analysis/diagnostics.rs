//! Gradient bounds, quasi-isometry certificates and superharmonic scans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::ops::{check_grid, grad_at};
use crate::fiber::{check_range, laplace_beltrami, metric_eigen_bounds, FiberGrid, MetricKind, MetricTag, ScalarField};
use crate::geometry::{ginv, witness_field, GraphState, WitnessKind};
use crate::warp::WarpingFunction;

/// `max |Du|_g / f(u)` over the nodes.
pub fn gradient_bound_constant(grid: &FiberGrid, f: &WarpingFunction, u: &ScalarField) -> Result<f64> {
    Ok(gradient_bounds(grid, f, u)?.0)
}

/// `(max |Du|/f(u), max |Du|)`
pub(crate) fn gradient_bounds(grid: &FiberGrid, f: &WarpingFunction, u: &ScalarField) -> Result<(f64, f64)> {
    check_grid(grid, u.grid())?;
    check_range(u, f)?;
    let gi = ginv(grid);
    let n = grid.dim();
    let mut rel = 0.0f64;
    let mut abs = 0.0f64;
    for p in 0..grid.len() {
        let du = grad_at(grid, u.values(), p);
        let g = (0..n).map(|k| gi[k] * du[k] * du[k]).sum::<f64>().sqrt();
        rel = rel.max(g / f.value(u.values()[p]));
        abs = abs.max(g);
    }
    Ok((rel, abs))
}

/// `min cos θ` over the graph.
pub fn angle_gap(state: &GraphState) -> f64 {
    state.cos_theta.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiIsometry {
    /// Extreme generalized eigenvalues of `ĝ = g_u/f(u)²` against `g`.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Gradient bound `c`, so the predicted range is `[1, 1 + c²]`.
    pub c: f64,
    /// Length distortion `√λ_max` of the identity `(M, ĝ) → (M, g)`.
    pub qi_constant: f64,
    pub pass: bool,
}

pub fn quasi_isometry_check(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u: &ScalarField,
    tol: f64,
) -> Result<QuasiIsometry> {
    let c = gradient_bound_constant(grid, f, u)?;
    let (lo, hi) = metric_eigen_bounds(grid, &MetricKind::Conformal { u, f }, &MetricKind::Fiber)?;
    Ok(QuasiIsometry {
        lambda_min: lo,
        lambda_max: hi,
        c,
        qi_constant: hi.sqrt(),
        pass: lo >= 1.0 - tol && hi <= 1.0 + c * c + tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub inf_h: f64,
    pub sup_h: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `[min(1, inf h²), 1 + sup h²]`
    pub bounds: [f64; 2],
    pub within: bool,
}

/// Compare `dx² + h(x)² dy²` with `dx² + dy²` on a box `[x0, x1] × [0, 1]`.
pub fn product_sandwich(h: &WarpingFunction, x_range: [f64; 2], count: usize) -> Result<Sandwich> {
    let grid = FiberGrid::bounded(&[x_range[0], 0.0], &[x_range[1] - x_range[0], 1.0], &[count, 4])?;
    let (lo, hi) = metric_eigen_bounds(&grid, &MetricKind::WarpedBase { phi: h }, &MetricKind::Fiber)?;
    let hs: Vec<f64> = (0..grid.count(0))
        .map(|i| h.value(grid.coord(grid.index(i, 0))[0]))
        .collect();
    let inf_h = hs.iter().copied().fold(f64::INFINITY, f64::min);
    let sup_h = hs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bounds = [1f64.min(inf_h * inf_h), 1.0 + sup_h * sup_h];
    Ok(Sandwich {
        inf_h,
        sup_h,
        lambda_min: lo,
        lambda_max: hi,
        bounds,
        within: lo >= bounds[0] * (1.0 - 1e-14) && hi <= bounds[1] * (1.0 + 1e-14),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub witness: WitnessKind,
    pub metric: MetricTag,
    pub nodes: usize,
    pub max_laplacian: f64,
    pub min_laplacian: f64,
    /// Share of scanned nodes with `Δ ≤ tol`.
    pub fraction_nonpositive: f64,
    pub superharmonic: bool,
}

/// Laplacian of a witness in the chosen metric, scanned over the nodes
/// (interior nodes only on a box). Scans in the conformal metric need a
/// minimal graph: `|H|∞ ≤ h_tol`.
pub fn superharmonic_scan(
    state: &GraphState,
    kind: WitnessKind,
    metric: &MetricKind,
    tol: f64,
    h_tol: f64,
) -> Result<ScanReport> {
    let tag = metric.tag();
    if tag == MetricTag::ConformalGhat {
        let h = state.max_abs_mean_curvature();
        if h > h_tol {
            return Err(Error::Hypothesis(format!(
                "conformal scans need a minimal graph; |H|∞ = {h:e} exceeds {h_tol:e}"
            )));
        }
    }
    let grid = state.grid();
    let w = witness_field(kind, state)?;
    let lap = laplace_beltrami(grid, metric, &w)?;
    let vals: Vec<f64> = (0..grid.len())
        .filter(|&p| !grid.is_boundary(p))
        .map(|p| lap.values()[p])
        .collect();
    let nodes = vals.len();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let nonpos = vals.iter().filter(|v| **v <= tol).count();
    Ok(ScanReport {
        witness: kind,
        metric: tag,
        nodes,
        max_laplacian: max,
        min_laplacian: min,
        fraction_nonpositive: nonpos as f64 / nodes.max(1) as f64,
        superharmonic: nonpos == nodes,
    })
}
