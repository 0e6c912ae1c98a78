//! Damped Newton and steepest descent for the discrete minimal-surface
//! equation `R_h(u) = 0`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::linalg::{banded_solve, gmres, Csr, GmresConfig};
use super::volume::{volume, volume_gradient};
use crate::error::{Error, Result};
use crate::fiber::ops::{check_grid, diff_stencil, grad_at};
use crate::fiber::{check_range, BoundaryPolicy, FiberGrid, ScalarField};
use crate::geometry::{density_terms, euler_lagrange, ginv};
use crate::warp::WarpingFunction;

/// Scale-aware constancy threshold: `std < CONSTANCY_TOL · (1 + |mean|)`.
pub const CONSTANCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NewtonDamped,
    Descent,
    FlowRelax,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::NewtonDamped => "newton_damped",
            Method::Descent => "descent",
            Method::FlowRelax => "flow_relax",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "newton_damped" | "newton" => Ok(Method::NewtonDamped),
            "descent" => Ok(Method::Descent),
            "flow_relax" | "flow" => Ok(Method::FlowRelax),
            _ => Err(Error::Config(format!("unknown solver method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearConfig {
    /// Relative residual target for GMRES.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for LinearConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            restart: 200,
            max_iter: 6000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: Method,
    /// Convergence threshold on `‖R_h‖∞`.
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Initial step length of each line search.
    pub damping: f64,
    /// Step shrink factor used when backtracking.
    pub backtrack: f64,
    /// Fraction of the explicit stability limit used by `flow_relax`.
    pub flow_safety: f64,
    /// Seed for initial perturbations drawn by callers.
    pub seed: u64,
    pub linear: LinearConfig,
    /// Iterates stay this fraction of the warping interval away from its ends.
    pub domain_margin: f64,
    /// Flow snapshots are kept every this many steps (0 keeps none).
    pub snapshot_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::NewtonDamped,
            tol_residual: 1e-10,
            max_iter: 50,
            damping: 1.0,
            backtrack: 0.5,
            flow_safety: 0.4,
            seed: 0,
            linear: LinearConfig::default(),
            domain_margin: 0.01,
            snapshot_every: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.tol_residual > 0.0) {
            return bad("tol_residual must be positive");
        }
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.flow_safety > 0.0 && self.flow_safety <= 1.0) {
            return bad("flow_safety must lie in (0, 1]");
        }
        if !(0.0..0.5).contains(&self.domain_margin) {
            return bad("domain_margin must lie in [0, 0.5)");
        }
        if !(self.linear.tol > 0.0) || self.linear.restart == 0 || self.linear.max_iter == 0 {
            return bad("linear solver settings must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub method: Method,
    pub iterations: usize,
    /// `‖R_h‖∞` over the unknowns, starting with the initial field.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Seconds; the only non-deterministic field.
    pub wall_time: f64,
    pub message: String,
}

impl SolverReport {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("history is never empty")
    }

    /// `std < CONSTANCY_TOL · (1 + |mean|)`
    pub fn is_constant(&self) -> bool {
        self.std < CONSTANCY_TOL * (1.0 + self.mean.abs())
    }
}

/// Grid nodes that are unknowns: all nodes on a torus, interior nodes on a
/// Dirichlet box.
pub(crate) struct Unknowns {
    pub free: Vec<usize>,
    pub slot: Vec<Option<usize>>,
}

impl Unknowns {
    pub fn new(grid: &FiberGrid) -> Result<Self> {
        if !grid.is_periodic() && grid.boundary() == BoundaryPolicy::OneSided {
            return Err(Error::Config(
                "the solvers need a periodic grid or Dirichlet boundary data".into(),
            ));
        }
        let mut slot = vec![None; grid.len()];
        let mut free = Vec::new();
        for (p, s) in slot.iter_mut().enumerate() {
            if !grid.is_boundary(p) {
                *s = Some(free.len());
                free.push(p);
            }
        }
        if free.is_empty() {
            return Err(Error::Grid("no interior nodes".into()));
        }
        Ok(Self { free, slot })
    }
}

/// Open window `[a + m, b − m]` kept by line searches; an infinite interval
/// gets an absolute margin of `frac`.
pub(crate) fn safe_window(f: &WarpingFunction, frac: f64) -> (f64, f64) {
    let d = f.domain();
    let span = d.span();
    let m = if span.is_finite() { frac * span } else { frac };
    (d.a + m, d.b - m)
}

pub(crate) fn inside(vals: &[f64], window: (f64, f64), dom: (f64, f64)) -> bool {
    vals.iter()
        .all(|&t| t.is_finite() && t >= window.0 && t <= window.1 && t > dom.0 && t < dom.1)
}

/// `‖R_h‖∞` over the free nodes, plus the first variation `F` there.
pub(crate) fn residual_on(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u: &ScalarField,
    unk: &Unknowns,
) -> Result<(f64, Vec<f64>)> {
    let fl = euler_lagrange(grid, f, u)?;
    let n = grid.dim() as i32;
    let mut rmax = 0.0f64;
    let fv: Vec<f64> = unk
        .free
        .iter()
        .map(|&p| {
            let r = fl[p] / f.value(u.values()[p]).powi(n);
            rmax = rmax.max(r.abs());
            fl[p]
        })
        .collect();
    Ok((rmax, fv))
}

/// Exact Jacobian of `F = e_u − div_h q` with respect to the free nodes.
pub(crate) fn jacobian(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u: &ScalarField,
    unk: &Unknowns,
) -> Result<Csr> {
    check_grid(grid, u.grid())?;
    check_range(u, f)?;
    let n = grid.dim();
    let gi = ginv(grid);
    let vals = u.values();
    let terms: Vec<_> = (0..grid.len())
        .map(|p| density_terms(n, gi, f.eval3(vals[p]), grad_at(grid, vals, p), true))
        .collect();
    let mut rows = Vec::with_capacity(unk.free.len());
    for &p in &unk.free {
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(32);
        let mut push = |r: usize, v: f64| {
            if let Some(s) = unk.slot[r] {
                if v != 0.0 {
                    row.push((s, v));
                }
            }
        };
        let tp = &terms[p];
        push(p, tp.de_du);
        for j in 0..n {
            for &(r, c) in diff_stencil(grid, p, j).iter() {
                push(r, tp.de_dp[j] * c);
            }
        }
        for k in 0..n {
            for &(q, c) in diff_stencil(grid, p, k).iter() {
                if c == 0.0 {
                    continue;
                }
                let tq = &terms[q];
                push(q, -c * tq.dq_du[k]);
                for j in 0..n {
                    for &(r, c2) in diff_stencil(grid, q, j).iter() {
                        push(r, -c * tq.dq_dp[k][j] * c2);
                    }
                }
            }
        }
        rows.push(row);
    }
    Ok(Csr::from_rows(unk.free.len(), rows))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn finish(
    method: Method,
    u: &ScalarField,
    iterations: usize,
    residuals: Vec<f64>,
    converged: bool,
    start: Instant,
    message: String,
) -> SolverReport {
    let s = u.stats();
    SolverReport {
        method,
        iterations,
        residuals,
        converged,
        mean: s.mean,
        std: s.std,
        min: s.min,
        max: s.max,
        wall_time: start.elapsed().as_secs_f64(),
        message,
    }
}

/// Solve the discrete minimal-surface equation from `u0`. Boundary nodes of
/// a Dirichlet box keep their `u0` values. Running out of iterations or
/// hitting a singular Jacobian is reported, not raised.
pub fn solve_minimal(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u0: &ScalarField,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolverReport)> {
    cfg.validate()?;
    check_grid(grid, u0.grid())?;
    check_range(u0, f)?;
    match cfg.method {
        Method::NewtonDamped => newton(grid, f, u0, cfg),
        Method::Descent => descent(grid, f, u0, cfg),
        Method::FlowRelax => {
            let out = super::flow::flow_relax(grid, f, u0, cfg)?;
            Ok((out.u, out.report))
        }
    }
}

fn newton(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u0: &ScalarField,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolverReport)> {
    let start = Instant::now();
    let unk = Unknowns::new(grid)?;
    let window = safe_window(f, cfg.domain_margin);
    let dom = (f.domain().a, f.domain().b);
    let mut u = u0.clone();
    let (mut rmax, mut fv) = residual_on(grid, f, &u, &unk)?;
    let mut history = vec![rmax];
    let gcfg = GmresConfig {
        rel_tol: cfg.linear.tol,
        abs_tol: 1e-300,
        restart: cfg.linear.restart,
        max_iter: cfg.linear.max_iter,
    };
    let mut iter = 0;
    let mut message = String::new();
    while rmax > cfg.tol_residual {
        if iter == cfg.max_iter {
            message = format!("max_iter = {} reached", cfg.max_iter);
            break;
        }
        let jac = jacobian(grid, f, &u, &unk)?;
        let rhs: Vec<f64> = fv.iter().map(|x| -x).collect();
        let step = if grid.is_periodic() {
            let (x, out) = gmres(&jac, &rhs, &gcfg);
            if !out.converged && out.residual > 0.5 * norm2(&rhs) {
                message = format!(
                    "linear solve stalled (relative residual {:e}); Jacobian may be singular",
                    out.residual / norm2(&rhs)
                );
                break;
            }
            x
        } else {
            match banded_solve(&jac, &rhs) {
                Ok(x) => x,
                Err(e) => {
                    message = format!("singular Jacobian: {e}");
                    break;
                }
            }
        };
        // Newton directions that descend the volume are globalised on the
        // volume itself (the functional is convex in Du, and ‖F‖ can stall
        // on steep graphs); otherwise on ‖F‖₂.
        let vol0 = volume(grid, f, &u)?;
        let vg = volume_gradient(grid, f, &u)?;
        let slope: f64 = unk
            .free
            .iter()
            .zip(&step)
            .map(|(&p, d)| vg.values()[p] * d)
            .sum();
        let f0 = norm2(&fv);
        let mut alpha = cfg.damping;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = u.values().to_vec();
            for (s, &p) in unk.free.iter().enumerate() {
                trial[p] += alpha * step[s];
            }
            if inside(&trial, window, dom) {
                let tu = ScalarField::new(*grid, trial)?;
                let (rt, ft) = residual_on(grid, f, &tu, &unk)?;
                let ok = if rt <= cfg.tol_residual {
                    true
                } else if slope < 0.0 {
                    let tv = volume(grid, f, &tu)?;
                    tv <= vol0 + 1e-4 * alpha * slope || norm2(&ft) <= 1e-3 * f0
                } else {
                    norm2(&ft) <= (1.0 - 1e-4 * alpha) * f0
                };
                if ok {
                    accepted = Some((tu, rt, ft));
                    break;
                }
            }
            alpha *= cfg.backtrack;
        }
        let Some((tu, rt, ft)) = accepted else {
            message = "line search failed to reduce the residual".into();
            break;
        };
        u = tu;
        rmax = rt;
        fv = ft;
        iter += 1;
        history.push(rmax);
    }
    let converged = rmax <= cfg.tol_residual;
    if converged {
        message = format!("converged in {iter} Newton step(s)");
    }
    let rep = finish(Method::NewtonDamped, &u, iter, history, converged, start, message);
    Ok((u, rep))
}

/// Steepest descent on the discrete volume with Armijo backtracking. The
/// search direction is the volume gradient divided by the cell measure.
fn descent(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u0: &ScalarField,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolverReport)> {
    let start = Instant::now();
    let unk = Unknowns::new(grid)?;
    let window = safe_window(f, cfg.domain_margin);
    let dom = (f.domain().a, f.domain().b);
    let mut u = u0.clone();
    let (mut rmax, _) = residual_on(grid, f, &u, &unk)?;
    let mut vol = volume(grid, f, &u)?;
    let mut history = vec![rmax];
    let mut alpha = cfg.damping * grid.h().powi(2);
    let mut iter = 0;
    let mut message = String::new();
    while rmax > cfg.tol_residual {
        if iter == cfg.max_iter {
            message = format!("max_iter = {} reached", cfg.max_iter);
            break;
        }
        let g = volume_gradient(grid, f, &u)?;
        let d: Vec<f64> = unk
            .free
            .iter()
            .map(|&p| -g.values()[p] / grid.cell_measure(p))
            .collect();
        let slope: f64 = unk
            .free
            .iter()
            .zip(&d)
            .map(|(&p, di)| g.values()[p] * di)
            .sum();
        if slope >= 0.0 {
            message = "volume gradient vanished".into();
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = u.values().to_vec();
            for (s, &p) in unk.free.iter().enumerate() {
                trial[p] += alpha * d[s];
            }
            if inside(&trial, window, dom) {
                let tu = ScalarField::new(*grid, trial)?;
                let tv = volume(grid, f, &tu)?;
                if tv <= vol + 1e-4 * alpha * slope {
                    accepted = Some((tu, tv));
                    break;
                }
            }
            alpha *= cfg.backtrack;
        }
        let Some((tu, tv)) = accepted else {
            message = "line search failed to decrease the volume".into();
            break;
        };
        u = tu;
        vol = tv;
        iter += 1;
        rmax = residual_on(grid, f, &u, &unk)?.0;
        history.push(rmax);
        // let the step grow back after a run of easy acceptances
        alpha /= cfg.backtrack;
    }
    let converged = rmax <= cfg.tol_residual;
    if converged {
        message = format!("converged in {iter} descent step(s)");
    }
    let rep = finish(Method::Descent, &u, iter, history, converged, start, message);
    Ok((u, rep))
}
