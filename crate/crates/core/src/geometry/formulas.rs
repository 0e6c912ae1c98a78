//! Closed-form Laplacians of the witness functions along a graph, and the
//! discrete Laplace–Beltrami values they are compared against.
//!
//! Notation per node: `s = sin²θ = |∇τ|²`, `c = cos θ`, `T = f² s`
//! (the conformal norm `‖∇̃τ‖²`), `L = (log f)''`, `H` the mean curvature.
//! The general forms keep the `H` terms; on minimal graphs they reduce to the
//! shorter displays returned by [`formula_laplacian_minimal`].

use serde::{Deserialize, Serialize};

use super::state::GraphState;
use super::witness::{witness_field, WitnessKind};
use crate::error::{Error, Result};
use crate::fiber::ops::diff_at;
use crate::fiber::{grad_norm_sq, laplace_beltrami, MetricKind, ScalarField};
use crate::warp::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `|∇τ|² = sin²θ = 1 − cos²θ`
    GradNorm,
    /// `Δτ`
    Dtau,
    /// `Δ f(τ)`
    Dftau,
    /// conformal `Δ̃τ`
    ConfTau,
    /// conformal `Δ̃ f(τ)`
    ConfFtau,
    /// conformal Laplacian of `∫_{s₀}^{τ} f`
    FLow,
    /// conformal Laplacian of `∫_{τ}^{s⁰} f`
    FUp,
    /// conformal Laplacian of `arccot f(τ)`
    Arccot,
    /// `Δ cos θ` in a product with flat fiber
    Lcos,
}

impl Identity {
    pub const ALL: [Identity; 9] = [
        Identity::GradNorm,
        Identity::Dtau,
        Identity::Dftau,
        Identity::ConfTau,
        Identity::ConfFtau,
        Identity::FLow,
        Identity::FUp,
        Identity::Arccot,
        Identity::Lcos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::GradNorm => "grad_norm",
            Identity::Dtau => "dtau",
            Identity::Dftau => "dftau",
            Identity::ConfTau => "conf_tau",
            Identity::ConfFtau => "conf_ftau",
            Identity::FLow => "f_low",
            Identity::FUp => "f_up",
            Identity::Arccot => "arccot",
            Identity::Lcos => "lcos",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the Laplacian is taken in the conformal metric.
    pub fn conformal(self) -> bool {
        matches!(
            self,
            Identity::ConfTau | Identity::ConfFtau | Identity::FLow | Identity::FUp | Identity::Arccot
        )
    }
}

fn require_product(state: &GraphState) -> Result<()> {
    if state.warping().is_preset(Preset::Constant) {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!(
            "Δcos θ identity needs a constant warping, got {}",
            state.warping().label()
        )))
    }
}

/// `g_Σ(∇H, ∇τ) = g(Du, DH) / W²` at every node.
fn grad_h_dot_grad_tau(state: &GraphState) -> Vec<f64> {
    let grid = state.grid();
    let n = grid.dim();
    (0..grid.len())
        .map(|p| {
            let mut s = 0.0;
            for k in 0..n {
                let dh = diff_at(grid, &state.mean_curvature, p, k);
                s += state.du[p][k] * dh / grid.metric_entry(k);
            }
            s / (state.w[p] * state.w[p])
        })
        .collect()
}

fn evaluate(which: Identity, state: &GraphState, keep_h: bool) -> Result<ScalarField> {
    let n = state.dim() as f64;
    let len = state.grid().len();
    let hk = if keep_h { 1.0 } else { 0.0 };
    let grad_h = if which == Identity::Lcos {
        require_product(state)?;
        Some(grad_h_dot_grad_tau(state))
    } else {
        None
    };
    let mut out = Vec::with_capacity(len);
    for p in 0..len {
        let [f, f1, _, l] = state.bundle[p];
        let c = state.cos_theta[p];
        let s = state.sin_sq(p);
        let t = f * f * s;
        let h = hk * state.mean_curvature[p];
        let v = match which {
            Identity::GradNorm => 1.0 - c * c,
            Identity::Dtau => (f1 / f) * (n - s) + n * h * c,
            Identity::Dftau => n * f1 * f1 / f + f * l * s + n * h * f1 * c,
            Identity::ConfTau => n * f * f1 - (n - 1.0) * (f1 / f) * t + n * f * f * h * c,
            Identity::ConfFtau => {
                n * f * f1 * f1 + (f * l - (n - 2.0) * f1 * f1 / f) * t + n * f * f * f1 * h * c
            }
            Identity::FLow | Identity::FUp => {
                let v = f1 * f * f * (n - (n - 2.0) * t / (f * f)) + n * f * f * f * h * c;
                if which == Identity::FUp {
                    -v
                } else {
                    v
                }
            }
            Identity::Arccot => {
                let q = 1.0 + f * f;
                let conf_f =
                    n * f * f1 * f1 + (f * l - (n - 2.0) * f1 * f1 / f) * t + n * f * f * f1 * h * c;
                -conf_f / q + 2.0 * f * f1 * f1 * t / (q * q)
            }
            Identity::Lcos => {
                let gh = grad_h.as_ref().expect("computed above")[p];
                -c * state.shape_sq_trace(p) - n * hk * gh
            }
        };
        out.push(v);
    }
    ScalarField::new(*state.grid(), out)
}

/// Right-hand side of the chosen identity, including mean-curvature terms
/// (valid on any graph).
pub fn formula_laplacian(which: Identity, state: &GraphState) -> Result<ScalarField> {
    evaluate(which, state, true)
}

/// The identity in its minimal-graph form (mean-curvature terms dropped);
/// refuses states whose `|H|∞` exceeds `h_tol`.
pub fn formula_laplacian_minimal(
    which: Identity,
    state: &GraphState,
    h_tol: f64,
) -> Result<ScalarField> {
    let needs_minimal = !matches!(which, Identity::GradNorm | Identity::Dtau | Identity::Dftau);
    let hmax = state.max_abs_mean_curvature();
    if needs_minimal && hmax > h_tol {
        return Err(Error::Hypothesis(format!(
            "{} is stated for minimal graphs; measured |H|∞ = {hmax:e} > {h_tol:e}",
            which.name()
        )));
    }
    evaluate(which, state, false)
}

/// The arccot expansion in its displayed arrangement,
/// `−(f/(1+f²)) L T − (f'²/(f²(1+f²))) {n (f² − T) f + 2 f T/(1+f²)}`,
/// for a minimal graph.
pub fn arccot_display_form(state: &GraphState) -> ScalarField {
    let n = state.dim() as f64;
    let vals = (0..state.grid().len())
        .map(|p| {
            let [f, f1, _, l] = state.bundle[p];
            let t = f * f * state.sin_sq(p);
            let q = 1.0 + f * f;
            -(f / q) * l * t - (f1 * f1 / (f * f * q)) * (n * (f * f - t) * f + 2.0 * f * t / q)
        })
        .collect();
    ScalarField::new(*state.grid(), vals).expect("node count")
}

/// The discrete side: Laplace–Beltrami of the witness in the graph or
/// conformal metric (or the discrete `|∇τ|²` for the angle identity).
pub fn discrete_laplacian(which: Identity, state: &GraphState) -> Result<ScalarField> {
    let grid = state.grid();
    let u = state.u();
    let f = state.warping();
    let graph = MetricKind::Graph { u, f };
    let conformal = MetricKind::Conformal { u, f };
    match which {
        Identity::GradNorm => grad_norm_sq(grid, &graph, u),
        Identity::Dtau => laplace_beltrami(grid, &graph, u),
        Identity::Dftau => laplace_beltrami(grid, &graph, &u.map(|t| f.value(t))),
        Identity::ConfTau => laplace_beltrami(grid, &conformal, u),
        Identity::ConfFtau => laplace_beltrami(grid, &conformal, &u.map(|t| f.value(t))),
        Identity::FLow => laplace_beltrami(grid, &conformal, &witness_field(WitnessKind::FLower, state)?),
        Identity::FUp => laplace_beltrami(grid, &conformal, &witness_field(WitnessKind::FUpper, state)?),
        Identity::Arccot => {
            laplace_beltrami(grid, &conformal, &witness_field(WitnessKind::ArccotFTau, state)?)
        }
        Identity::Lcos => {
            require_product(state)?;
            laplace_beltrami(grid, &graph, &state.cos_theta_field())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::FiberGrid;
    use crate::geometry::assemble_state;
    use crate::warp::WarpingFunction;

    #[test]
    fn slices_are_tau_harmonic() {
        let g = FiberGrid::unit_torus(2, 8).unwrap();
        let f = WarpingFunction::preset(Preset::CounterA);
        let st = assemble_state(&g, &f, &ScalarField::constant(g, 0.8)).unwrap();
        let v = formula_laplacian(Identity::Dtau, &st).unwrap();
        assert!(v.values().iter().all(|x| *x == 0.0));
        let d = discrete_laplacian(Identity::Dtau, &st).unwrap();
        assert!(d.values().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn minimal_slice_has_zero_conformal_tau_laplacian() {
        let g = FiberGrid::unit_torus(2, 8).unwrap();
        let st = assemble_state(&g, &WarpingFunction::cosh(), &ScalarField::constant(g, 0.0)).unwrap();
        let v = formula_laplacian_minimal(Identity::ConfTau, &st, 1e-12).unwrap();
        assert!(v.values().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn minimal_forms_refuse_curved_graphs() {
        let g = FiberGrid::unit_torus(2, 8).unwrap();
        let st = assemble_state(&g, &WarpingFunction::cosh(), &ScalarField::constant(g, 1.0)).unwrap();
        assert!(matches!(
            formula_laplacian_minimal(Identity::Arccot, &st, 1e-8),
            Err(Error::Hypothesis(_))
        ));
        assert!(formula_laplacian_minimal(Identity::Dtau, &st, 1e-8).is_ok());
        assert!(matches!(formula_laplacian(Identity::Lcos, &st), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn f_low_nonpositive_for_non_increasing_warp() {
        // f = e^{-t} is non-increasing; on a slice the brace is n
        let dom = crate::warp::IntervalDomain::real_line();
        let f = WarpingFunction::custom("exp(-t)", dom, |t| {
            let e = (-t).exp();
            [e, -e, e]
        });
        let g = FiberGrid::unit_torus(2, 16).unwrap();
        let u = ScalarField::random_smooth(g, 0.7, 3, 4);
        let st = assemble_state(&g, &f, &u).unwrap();
        let v = formula_laplacian_minimal(Identity::FLow, &st, f64::INFINITY).unwrap();
        assert!(v.values().iter().all(|x| *x <= 0.0));
        for p in 0..g.len() {
            let t = st.bundle[p][0].powi(2) * st.sin_sq(p);
            assert!(t < st.bundle[p][0].powi(2));
        }
    }

    #[test]
    fn arccot_forms_agree_and_are_nonpositive() {
        let g = FiberGrid::unit_torus(2, 16).unwrap();
        let u = ScalarField::random_smooth(g, 1.2, 3, 6);
        for p in [Preset::Cosh, Preset::CounterA, Preset::Exp] {
            let st = assemble_state(&g, &WarpingFunction::preset(p), &u).unwrap();
            let a = formula_laplacian_minimal(Identity::Arccot, &st, f64::INFINITY).unwrap();
            let b = arccot_display_form(&st);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
                assert!(*x <= 1e-14, "{p}: {x}");
            }
        }
    }

    #[test]
    fn lcos_minimal_form_is_nonpositive() {
        let g = FiberGrid::unit_torus(2, 16).unwrap();
        let u = ScalarField::random_smooth(g, 0.3, 3, 1);
        let st = assemble_state(&g, &WarpingFunction::constant(), &u).unwrap();
        let v = formula_laplacian_minimal(Identity::Lcos, &st, f64::INFINITY).unwrap();
        assert!(v.values().iter().all(|x| *x <= 0.0));
    }
}
