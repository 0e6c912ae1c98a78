//! Grid-refinement comparison of discrete Laplacians against closed forms.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::formulas::{discrete_laplacian, formula_laplacian, Identity};
use super::state::assemble_state;
use crate::error::Result;
use crate::fiber::{FiberGrid, ScalarField};
use crate::warp::WarpingFunction;

/// Gaps at or below this are treated as round-off.
pub const EXACT_GAP: f64 = 1e-11;

pub type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A smooth graph `u` over the periodic box `extents`, in `I ×_f M`.
#[derive(Clone)]
pub struct IdentityProblem {
    pub label: String,
    pub f: WarpingFunction,
    pub extents: Vec<f64>,
    pub u: FieldFn,
}

impl fmt::Debug for IdentityProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdentityProblem")
            .field("label", &self.label)
            .field("f", &self.f.label())
            .field("extents", &self.extents)
            .finish()
    }
}

impl IdentityProblem {
    /// `u = 0.1 sin(2πx) cos(2πy)` on the unit 2-torus; `f = cosh`, or the
    /// product `f = 1` for the `Δcos θ` identity.
    pub fn standard(which: Identity) -> Self {
        let f = if which == Identity::Lcos {
            WarpingFunction::constant()
        } else {
            WarpingFunction::cosh()
        };
        Self {
            label: "0.1 sin(2πx) cos(2πy)".into(),
            f,
            extents: vec![1.0, 1.0],
            u: Arc::new(|x, y| 0.1 * (TAU * x).sin() * (TAU * y).cos()),
        }
    }

    pub fn constant(f: WarpingFunction, t0: f64) -> Self {
        Self {
            label: format!("u ≡ {t0}"),
            f,
            extents: vec![1.0, 1.0],
            u: Arc::new(move |_, _| t0),
        }
    }

    pub fn grid(&self, count: usize) -> Result<FiberGrid> {
        FiberGrid::periodic(&self.extents, &vec![count; self.extents.len()])
    }

    pub fn gap_at(&self, which: Identity, count: usize) -> Result<LevelGap> {
        let grid = self.grid(count)?;
        let u = ScalarField::from_fn(grid, |x, y| (self.u)(x, y));
        let st = assemble_state(&grid, &self.f, &u)?;
        let lhs = discrete_laplacian(which, &st)?;
        let rhs = formula_laplacian(which, &st)?;
        let gap = lhs
            .values()
            .iter()
            .zip(rhs.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(LevelGap {
            count,
            h: grid.h(),
            max_abs_gap: gap,
            max_abs_mean_curvature: st.max_abs_mean_curvature(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelGap {
    pub count: usize,
    pub h: f64,
    pub max_abs_gap: f64,
    pub max_abs_mean_curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: Identity,
    pub problem: String,
    pub levels: Vec<LevelGap>,
    /// Least-squares slope of `log gap` against `log h`.
    pub observed_order: Option<f64>,
    /// Orders between consecutive levels.
    pub pair_orders: Vec<f64>,
    /// Every gap is at round-off level.
    pub exact: bool,
    pub required_order: f64,
    pub pass: bool,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_order(h: &[f64], gaps: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(gaps)
        .filter(|(_, g)| **g > 0.0)
        .map(|(h, g)| (h.ln(), g.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

pub fn identity_report(
    which: Identity,
    problem: &IdentityProblem,
    counts: &[usize],
    required_order: f64,
) -> Result<IdentityReport> {
    let levels = counts
        .iter()
        .map(|&c| problem.gap_at(which, c))
        .collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let gaps: Vec<f64> = levels.iter().map(|l| l.max_abs_gap).collect();
    let exact = gaps.iter().all(|g| *g <= EXACT_GAP);
    let observed_order = if exact { None } else { fitted_order(&hs, &gaps) };
    let pair_orders = levels
        .windows(2)
        .map(|w| (w[0].max_abs_gap / w[1].max_abs_gap).ln() / (w[0].h / w[1].h).ln())
        .collect();
    let pass = exact || observed_order.is_some_and(|o| o >= required_order);
    Ok(IdentityReport {
        identity: which,
        problem: problem.label.clone(),
        levels,
        observed_order,
        pair_orders,
        exact,
        required_order,
        pass,
    })
}
