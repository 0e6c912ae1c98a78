//! Explicit relaxation `u ← u + dt · W · R_h(u) / n` toward `R_h = 0`.
//!
//! With `R_h = nH` this is the graph form of mean curvature flow. Steps that
//! increase the volume are retried with half the time step.

use std::time::Instant;

use super::newton::{finish, residual_on, Method, SolverConfig, SolverReport, Unknowns};
use super::volume::volume;
use crate::error::{Error, Result};
use crate::fiber::ops::{check_grid, grad_at};
use crate::fiber::{check_range, FiberGrid, ScalarField};
use crate::geometry::ginv;
use crate::warp::WarpingFunction;

#[derive(Debug, Clone)]
pub struct FlowOutput {
    pub u: ScalarField,
    pub report: SolverReport,
    /// `(step, field)` every `snapshot_every` steps, starting with step 0.
    pub snapshots: Vec<(usize, ScalarField)>,
    /// Volume after every accepted step, starting with the initial field.
    pub volumes: Vec<f64>,
}

/// Stability cap `2n f_min / Σ gⁱⁱ/hᵢ²` of the linearised explicit scheme.
pub fn stable_dt(grid: &FiberGrid, f: &WarpingFunction, u: &ScalarField) -> f64 {
    let gi = ginv(grid);
    let n = grid.dim();
    let lam: f64 = (0..n).map(|k| gi[k] / grid.spacing(k).powi(2)).sum();
    let fmin = u
        .values()
        .iter()
        .map(|&t| f.value(t))
        .fold(f64::INFINITY, f64::min);
    2.0 * n as f64 * fmin / lam
}

pub fn flow_relax(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u0: &ScalarField,
    cfg: &SolverConfig,
) -> Result<FlowOutput> {
    cfg.validate()?;
    check_grid(grid, u0.grid())?;
    check_range(u0, f)?;
    let start = Instant::now();
    let unk = Unknowns::new(grid)?;
    let n = grid.dim();
    let nf = n as f64;
    let gi = ginv(grid);
    let dom = f.domain();
    let mut u = u0.clone();
    let (mut rmax, _) = residual_on(grid, f, &u, &unk)?;
    let mut history = vec![rmax];
    let mut vol = volume(grid, f, &u)?;
    let mut volumes = vec![vol];
    let mut snapshots = Vec::new();
    if cfg.snapshot_every > 0 {
        snapshots.push((0, u.clone()));
    }
    let mut step = 0;
    let mut message = String::new();
    while rmax > cfg.tol_residual {
        if step == cfg.max_iter {
            message = format!("max_iter = {} reached", cfg.max_iter);
            break;
        }
        let (_, fv) = residual_on(grid, f, &u, &unk)?;
        let vals = u.values();
        // W R / n with R = −F / fⁿ
        let vel: Vec<f64> = unk
            .free
            .iter()
            .zip(&fv)
            .map(|(&p, fl)| {
                let a = f.value(vals[p]);
                let du = grad_at(grid, vals, p);
                let gsq: f64 = (0..n).map(|k| gi[k] * du[k] * du[k]).sum();
                let w = (a * a + gsq).sqrt();
                -w * fl / (a.powi(n as i32) * nf)
            })
            .collect();
        let mut dt = cfg.flow_safety * stable_dt(grid, f, &u);
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial = vals.to_vec();
            for (s, &p) in unk.free.iter().enumerate() {
                trial[p] += dt * vel[s];
            }
            if let Some((q, &t)) = trial
                .iter()
                .enumerate()
                .find(|(_, t)| !t.is_finite() || !dom.contains(**t))
            {
                return Err(Error::BlowUp {
                    step: step + 1,
                    reason: format!("u = {t} at node {q} leaves ({}, {})", dom.a, dom.b),
                });
            }
            let tu = ScalarField::new(*grid, trial)?;
            let tv = volume(grid, f, &tu)?;
            if tv <= vol {
                accepted = Some((tu, tv));
                break;
            }
            dt *= 0.5;
        }
        let Some((tu, tv)) = accepted else {
            message = "no volume-decreasing step found".into();
            break;
        };
        u = tu;
        vol = tv;
        step += 1;
        rmax = residual_on(grid, f, &u, &unk)?.0;
        history.push(rmax);
        volumes.push(vol);
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
            snapshots.push((step, u.clone()));
        }
    }
    let converged = rmax <= cfg.tol_residual;
    if converged {
        message = format!("converged in {step} flow step(s)");
    }
    let report = finish(Method::FlowRelax, &u, step, history, converged, start, message);
    Ok(FlowOutput {
        u,
        report,
        snapshots,
        volumes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::newton::solve_minimal;
    use std::f64::consts::TAU;

    fn cfg(max_iter: usize, tol: f64) -> SolverConfig {
        SolverConfig {
            method: Method::FlowRelax,
            max_iter,
            tol_residual: tol,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn minimal_slice_is_stationary() {
        let g = FiberGrid::unit_torus(2, 12).unwrap();
        let u0 = ScalarField::zeros(g);
        let out = flow_relax(&g, &WarpingFunction::cosh(), &u0, &cfg(10, 1e-12)).unwrap();
        assert!(out.report.converged);
        assert_eq!(out.report.iterations, 0);
        assert_eq!(out.u.values(), u0.values());
    }

    #[test]
    fn product_sine_decays_with_monotone_residual() {
        let g = FiberGrid::unit_torus(1, 32).unwrap();
        let u0 = ScalarField::from_fn(g, |x, _| (TAU * x).sin());
        let c = SolverConfig {
            snapshot_every: 100,
            ..cfg(20000, 1e-9)
        };
        let out = flow_relax(&g, &WarpingFunction::constant(), &u0, &c).unwrap();
        assert!(out.report.converged, "{}", out.report.message);
        assert!(out.report.is_constant() || out.report.std < 1e-8);
        let r = &out.report.residuals;
        for w in r[10..].windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} {}", w[0], w[1]);
        }
        for w in out.volumes.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(out.snapshots[0].0, 0);
        assert!(out.snapshots.iter().all(|(s, _)| s % 100 == 0));
    }

    #[test]
    fn cosh_line_flows_to_zero_and_matches_newton() {
        let g = FiberGrid::unit_torus(1, 16).unwrap();
        let f = WarpingFunction::cosh();
        let u0 = ScalarField::constant(g, 0.5);
        let out = flow_relax(&g, &f, &u0, &cfg(100000, 1e-10)).unwrap();
        assert!(out.report.converged);
        let (un, _) = solve_minimal(&g, &f, &u0, &SolverConfig::default()).unwrap();
        for (a, b) in out.u.values().iter().zip(un.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn leaving_the_domain_is_a_blow_up() {
        // slices of e^t have R = −n, so the flow pushes u down past −0.02
        let f = WarpingFunction::exp()
            .with_domain(crate::warp::IntervalDomain::new(-0.02, 5.0).unwrap())
            .unwrap();
        let g = FiberGrid::unit_torus(1, 8).unwrap();
        let u0 = ScalarField::constant(g, 0.0);
        let c = SolverConfig {
            flow_safety: 1.0,
            ..cfg(1000, 1e-10)
        };
        let err = flow_relax(&g, &f, &u0, &c).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }), "{err}");
    }
}
