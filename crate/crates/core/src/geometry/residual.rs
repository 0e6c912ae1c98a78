//! Discrete Euler–Lagrange operator of the graph volume and the minimal
//! surface residual built from it.
//!
//! The volume density is `V(u, Du) = f(u)^{n-1} W` with
//! `W = √(f(u)² + |Du|²_g)`. Writing `e_u = ∂V/∂u` and `q = ∂V/∂(Du)`, the
//! discrete first variation is `F = e_u − div_h q` and the residual is
//! `R_h = −F / f(u)^n`, normalised so that a slice has `R = −n f'/f = n H`.

use crate::error::Result;
use crate::fiber::ops::{check_grid, divergence_raw, grad_at};
use crate::fiber::{check_range, FiberGrid, ScalarField};
use crate::warp::WarpingFunction;

/// Point values of the volume density derivatives and, optionally, their
/// partial derivatives in `u` and `p = Du`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DensityTerms {
    pub density: f64,
    pub e_u: f64,
    pub q: [f64; 2],
    pub de_du: f64,
    pub de_dp: [f64; 2],
    pub dq_du: [f64; 2],
    pub dq_dp: [[f64; 2]; 2],
}

#[inline]
pub fn density_terms(
    n: usize,
    ginv: [f64; 2],
    fb: [f64; 3],
    p: [f64; 2],
    with_jacobian: bool,
) -> DensityTerms {
    let [a, a1, a2] = fb;
    let ni = n as i32;
    let nf = n as f64;
    let v = [ginv[0] * p[0], ginv[1] * p[1]];
    let grad_sq: f64 = (0..n).map(|k| v[k] * p[k]).sum();
    let w = (a * a + grad_sq).sqrt();
    let an = a.powi(ni);
    let an1 = a.powi(ni - 1);
    let an2 = a.powi(ni - 2);
    let density = an1 * w;
    let e_u = (nf - 1.0) * an2 * a1 * w + an * a1 / w;
    let mut q = [0.0; 2];
    for k in 0..n {
        q[k] = an1 * v[k] / w;
    }
    let mut t = DensityTerms {
        density,
        e_u,
        q,
        ..DensityTerms::default()
    };
    if !with_jacobian {
        return t;
    }
    let w3 = w * w * w;
    let w_u = a * a1 / w;
    let an3 = a.powi(ni - 3);
    t.de_du = (nf - 1.0) * ((nf - 2.0) * an3 * a1 * a1 * w + an2 * a2 * w + an2 * a1 * w_u)
        + nf * an1 * a1 * a1 / w
        + an * a2 / w
        - an * a1 * w_u / (w * w);
    let mixed = (nf - 1.0) * an2 * a1 / w - an * a1 / w3;
    for j in 0..n {
        t.de_dp[j] = mixed * v[j];
        t.dq_du[j] = mixed * v[j];
        for i in 0..n {
            let diag = if i == j { ginv[i] / w } else { 0.0 };
            t.dq_dp[i][j] = an1 * (diag - v[i] * v[j] / w3);
        }
    }
    t
}

pub(crate) fn ginv(grid: &FiberGrid) -> [f64; 2] {
    [1.0 / grid.metric_entry(0), 1.0 / grid.metric_entry(1)]
}

/// Density terms at every node (no Jacobian).
pub(crate) fn all_terms(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u: &ScalarField,
) -> Result<Vec<DensityTerms>> {
    check_grid(grid, u.grid())?;
    check_range(u, f)?;
    let gi = ginv(grid);
    let n = grid.dim();
    Ok((0..grid.len())
        .map(|p| {
            let du = grad_at(grid, u.values(), p);
            density_terms(n, gi, f.eval3(u.values()[p]), du, false)
        })
        .collect())
}

/// `F = e_u − div_h q` at every node.
pub fn euler_lagrange(grid: &FiberGrid, f: &WarpingFunction, u: &ScalarField) -> Result<Vec<f64>> {
    let terms = all_terms(grid, f, u)?;
    let n = grid.dim();
    let mut flux = vec![0.0; n * grid.len()];
    for (p, t) in terms.iter().enumerate() {
        flux[p * n..p * n + n].copy_from_slice(&t.q[..n]);
    }
    let div = divergence_raw(grid, &flux);
    Ok(terms.iter().zip(div).map(|(t, d)| t.e_u - d).collect())
}

/// Minimal-surface residual `R_h = −F / f(u)^n`; zero exactly at discrete
/// critical points of the volume.
pub fn ms_residual(grid: &FiberGrid, f: &WarpingFunction, u: &ScalarField) -> Result<ScalarField> {
    let fl = euler_lagrange(grid, f, u)?;
    let n = grid.dim() as i32;
    let vals = fl
        .iter()
        .zip(u.values())
        .map(|(x, &t)| -x / f.value(t).powi(n))
        .collect();
    ScalarField::new(*grid, vals)
}

/// The residual written literally in divergence form,
/// `div(Du / (f W)) − (f'/W)(n − |Du|²/f²)`.
pub fn ms_residual_divergence_form(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u: &ScalarField,
) -> Result<ScalarField> {
    check_grid(grid, u.grid())?;
    check_range(u, f)?;
    let n = grid.dim();
    let gi = ginv(grid);
    let mut flux = vec![0.0; n * grid.len()];
    let mut source = vec![0.0; grid.len()];
    for p in 0..grid.len() {
        let du = grad_at(grid, u.values(), p);
        let [a, a1, _] = f.eval3(u.values()[p]);
        let gsq: f64 = (0..n).map(|k| gi[k] * du[k] * du[k]).sum();
        let w = (a * a + gsq).sqrt();
        for k in 0..n {
            flux[p * n + k] = gi[k] * du[k] / (a * w);
        }
        source[p] = (a1 / w) * (n as f64 - gsq / (a * a));
    }
    let div = divergence_raw(grid, &flux);
    ScalarField::new(*grid, div.iter().zip(source).map(|(d, s)| d - s).collect())
}
