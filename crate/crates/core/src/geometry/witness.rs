use serde::{Deserialize, Serialize};

use super::state::GraphState;
use crate::error::{Error, Result};
use crate::fiber::ScalarField;
use crate::quad::{self, QuadConfig};
use crate::warp::WarpingFunction;

/// Test functions whose Laplacian sign the uniqueness arguments use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `arccot f(τ)`, values in `(0, π/2)`.
    ArccotFTau,
    /// `ℱ(τ) = ∫_{s₀}^{τ} f` with `s₀ = min τ`.
    FLower,
    /// `∫_{τ}^{s⁰} f` with `s⁰ = max τ`.
    FUpper,
    CosTheta,
    /// `1/cosh² x` in the first fiber coordinate.
    SechSq,
}

impl WitnessKind {
    pub const ALL: [WitnessKind; 5] = [
        WitnessKind::ArccotFTau,
        WitnessKind::FLower,
        WitnessKind::FUpper,
        WitnessKind::CosTheta,
        WitnessKind::SechSq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WitnessKind::ArccotFTau => "arccot_f_tau",
            WitnessKind::FLower => "f_lower",
            WitnessKind::FUpper => "f_upper",
            WitnessKind::CosTheta => "cos_theta",
            WitnessKind::SechSq => "sech_sq",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// `∫_{from}^{to} f` by adaptive quadrature.
pub fn integral_of_warp(f: &WarpingFunction, from: f64, to: f64) -> Result<f64> {
    let cfg = QuadConfig::default();
    let r = quad::integrate(|t| f.value(t), from, to, &cfg);
    if !r.converged {
        return Err(Error::Quadrature(format!(
            "∫ f over [{from}, {to}] did not converge (estimate {}, error {})",
            r.value, r.abs_error
        )));
    }
    Ok(r.value)
}

/// Primitive of `f` anchored at `s` evaluated at every node of `u`.
pub fn primitive_field(f: &WarpingFunction, u: &ScalarField, s: f64) -> Result<ScalarField> {
    let vals = u
        .values()
        .iter()
        .map(|&t| if t == s { Ok(0.0) } else { integral_of_warp(f, s, t) })
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(*u.grid(), vals)
}

pub fn witness_field(kind: WitnessKind, state: &GraphState) -> Result<ScalarField> {
    let u = state.u();
    let f = state.warping();
    match kind {
        WitnessKind::ArccotFTau => Ok(ScalarField::new(
            *state.grid(),
            state.bundle.iter().map(|b| (1.0 / b[0]).atan()).collect(),
        )?),
        WitnessKind::FLower => {
            let s0 = u.min();
            if !s0.is_finite() {
                return Err(Error::Hypothesis("τ is not bounded below".into()));
            }
            primitive_field(f, u, s0)
        }
        WitnessKind::FUpper => {
            let s1 = u.max();
            if !s1.is_finite() {
                return Err(Error::Hypothesis("τ is not bounded above".into()));
            }
            Ok(primitive_field(f, u, s1)?.map(|v| -v))
        }
        WitnessKind::CosTheta => Ok(state.cos_theta_field()),
        WitnessKind::SechSq => Ok(ScalarField::from_fn(*state.grid(), |x, _| {
            let c = x.cosh();
            1.0 / (c * c)
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::FiberGrid;
    use crate::geometry::assemble_state;

    #[test]
    fn witness_basics() {
        let g = FiberGrid::unit_torus(2, 8).unwrap();
        let st = assemble_state(&g, &WarpingFunction::cosh(), &ScalarField::constant(g, 0.4)).unwrap();
        let fl = witness_field(WitnessKind::FLower, &st).unwrap();
        assert!(fl.values().iter().all(|v| *v == 0.0));
        let st1 = assemble_state(&g, &WarpingFunction::constant(), &ScalarField::random_smooth(g, 0.5, 3, 2)).unwrap();
        let ac = witness_field(WitnessKind::ArccotFTau, &st1).unwrap();
        assert!(ac.values().iter().all(|v| (v - std::f64::consts::FRAC_PI_4).abs() < 1e-15));
        let b = FiberGrid::bounded(&[-5.0], &[10.0], &[101]).unwrap();
        let st = assemble_state(&b, &WarpingFunction::constant(), &ScalarField::zeros(b)).unwrap();
        let s = witness_field(WitnessKind::SechSq, &st).unwrap();
        assert_eq!(s.max(), 1.0);
        assert_eq!(s.values()[50], 1.0);
    }

    #[test]
    fn primitives_are_nonnegative_and_exact() {
        let g = FiberGrid::unit_torus(2, 16).unwrap();
        let u = ScalarField::random_smooth(g, 0.8, 3, 9);
        let st = assemble_state(&g, &WarpingFunction::cosh(), &u).unwrap();
        let lo = witness_field(WitnessKind::FLower, &st).unwrap();
        let up = witness_field(WitnessKind::FUpper, &st).unwrap();
        let (s0, s1) = (u.min(), u.max());
        for p in 0..g.len() {
            let t = u.values()[p];
            assert!(lo.values()[p] >= 0.0 && up.values()[p] >= 0.0);
            assert!((lo.values()[p] - (t.sinh() - s0.sinh())).abs() < 1e-13);
            assert!((up.values()[p] - (s1.sinh() - t.sinh())).abs() < 1e-13);
        }
    }
}
