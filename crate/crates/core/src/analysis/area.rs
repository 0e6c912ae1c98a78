//! Area of a graph in `ℝ³` inside Euclidean balls, for the quadratic growth
//! bound of minimizing graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GraphState;
use crate::warp::Preset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaGrowth {
    pub center: [f64; 3],
    pub radii: Vec<f64>,
    pub areas: Vec<f64>,
    /// `2πr² + 5h` for each radius.
    pub bounds: Vec<f64>,
    pub within: bool,
    pub warnings: Vec<String>,
}

/// Sum the cell areas `W dA` of nodes whose graph point `(x, y, u)` lies in
/// the closed ball of radius `r` about `center`.
pub fn ball_area_growth(state: &GraphState, center: [f64; 3], radii: &[f64]) -> Result<AreaGrowth> {
    let grid = state.grid();
    if grid.dim() != 2 {
        return Err(Error::Config(format!("area growth needs a 2-D fiber, got dimension {}", grid.dim())));
    }
    let f = state.warping();
    if !(f.is_preset(Preset::Constant) && f.scale() == 1.0) {
        return Err(Error::Config(format!(
            "area growth needs the product ambient f = 1, got {}",
            f.label()
        )));
    }
    if grid.is_periodic() {
        return Err(Error::Config("area growth needs a bounded box, not a torus".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::Config(format!("radius {r} must be positive and finite")));
    }
    let lo = grid.origin();
    let ext = grid.extents();
    let mut warnings = Vec::new();
    for &r in radii {
        let fits = (0..2).all(|k| center[k] - r >= lo[k] && center[k] + r <= lo[k] + ext[k]);
        if !fits {
            warnings.push(format!("ball of radius {r} exceeds the grid; its area is truncated"));
        }
    }
    let u = state.u().values();
    let pts: Vec<(f64, f64)> = (0..grid.len())
        .map(|p| {
            let [x, y] = grid.coord(p);
            let d2 = (x - center[0]).powi(2) + (y - center[1]).powi(2) + (u[p] - center[2]).powi(2);
            (d2, grid.cell_measure(p) * state.w[p])
        })
        .collect();
    let areas: Vec<f64> = radii
        .iter()
        .map(|&r| pts.iter().filter(|(d2, _)| *d2 <= r * r).map(|(_, a)| a).sum())
        .collect();
    let h = grid.h();
    let bounds: Vec<f64> = radii
        .iter()
        .map(|r| 2.0 * std::f64::consts::PI * r * r + 5.0 * h)
        .collect();
    let within = areas.iter().zip(&bounds).all(|(a, b)| a <= b);
    Ok(AreaGrowth {
        center,
        radii: radii.to_vec(),
        areas,
        bounds,
        within,
        warnings,
    })
}
