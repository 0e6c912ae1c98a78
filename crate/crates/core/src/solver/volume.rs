//! Discrete graph volume `Σ_p w_p f(u)^{n-1} W` and its exact gradient.

use crate::error::Result;
use crate::fiber::ops::diff_stencil;
use crate::fiber::{FiberGrid, ScalarField};
use crate::geometry::all_terms;
use crate::warp::WarpingFunction;

/// Volume of the graph of `u`, integrated against the fiber measure.
pub fn volume(grid: &FiberGrid, f: &WarpingFunction, u: &ScalarField) -> Result<f64> {
    let terms = all_terms(grid, f, u)?;
    Ok(terms
        .iter()
        .enumerate()
        .map(|(p, t)| grid.cell_measure(p) * t.density)
        .sum())
}

/// `∂ vol / ∂u_r` for every node `r`. On a torus this equals
/// `w_r (e_u − div_h q)_r`, i.e. the quadrature weight times the discrete
/// Euler–Lagrange operator.
pub fn volume_gradient(grid: &FiberGrid, f: &WarpingFunction, u: &ScalarField) -> Result<ScalarField> {
    let terms = all_terms(grid, f, u)?;
    let n = grid.dim();
    let mut g = vec![0.0; grid.len()];
    for (p, t) in terms.iter().enumerate() {
        let w = grid.cell_measure(p);
        g[p] += w * t.e_u;
        for k in 0..n {
            for &(r, c) in diff_stencil(grid, p, k).iter() {
                g[r] += w * t.q[k] * c;
            }
        }
    }
    ScalarField::new(*grid, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{euler_lagrange, ms_residual};

    #[test]
    fn slice_volume() {
        let g = FiberGrid::unit_torus(2, 8).unwrap();
        let f = WarpingFunction::cosh();
        let v = volume(&g, &f, &ScalarField::constant(g, 0.8)).unwrap();
        assert!((v - 0.8f64.cosh().powi(2)).abs() < 1e-13);
        let v = volume(&g, &WarpingFunction::constant(), &ScalarField::zeros(g)).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tilted_line_and_plane() {
        let a = 0.7;
        let g = FiberGrid::bounded(&[0.0, 0.0], &[1.0, 1.0], &[11, 11]).unwrap();
        let u = ScalarField::from_fn(g, |x, _| a * x);
        let v = volume(&g, &WarpingFunction::constant(), &u).unwrap();
        assert!((v - (1.0f64 + a * a).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn gradient_is_weighted_euler_lagrange_on_torus() {
        let g = FiberGrid::periodic(&[1.0, 2.0], &[12, 10]).unwrap();
        let f = WarpingFunction::cosh();
        let u = ScalarField::random_smooth(g, 0.6, 3, 2);
        let vg = volume_gradient(&g, &f, &u).unwrap();
        let el = euler_lagrange(&g, &f, &u).unwrap();
        let r = ms_residual(&g, &f, &u).unwrap();
        for p in 0..g.len() {
            let w = g.cell_measure(p);
            assert!((vg.values()[p] - w * el[p]).abs() < 1e-13 * (1.0 + el[p].abs()));
            let fn2 = f.value(u.values()[p]).powi(2);
            assert!((vg.values()[p] + w * fn2 * r.values()[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn cosh_slice_gradient_has_constant_sign() {
        let g = FiberGrid::unit_torus(2, 8).unwrap();
        let vg = volume_gradient(&g, &WarpingFunction::cosh(), &ScalarField::constant(g, 1.0)).unwrap();
        assert!(vg.values().iter().all(|v| *v > 0.0));
        let vg = volume_gradient(&g, &WarpingFunction::cosh(), &ScalarField::constant(g, 0.0)).unwrap();
        assert!(vg.values().iter().all(|v| *v == 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(20))]

            #[test]
            fn gradient_matches_centered_difference(seed in any::<u64>(), periodic in any::<bool>()) {
                let g = if periodic {
                    FiberGrid::periodic(&[1.0, 1.5], &[10, 12]).unwrap()
                } else {
                    FiberGrid::bounded(&[-1.0, 0.0], &[2.0, 1.0], &[10, 9]).unwrap()
                };
                let f = WarpingFunction::preset(crate::warp::Preset::CounterA);
                let u = ScalarField::random_smooth(g, 0.8, 3, seed);
                let v = ScalarField::random_smooth(g, 1.0, 3, seed.wrapping_add(1));
                let eps = 1e-6;
                let up = ScalarField::new(g, u.values().iter().zip(v.values()).map(|(a, b)| a + eps * b).collect()).unwrap();
                let um = ScalarField::new(g, u.values().iter().zip(v.values()).map(|(a, b)| a - eps * b).collect()).unwrap();
                let fd = (volume(&g, &f, &up).unwrap() - volume(&g, &f, &um).unwrap()) / (2.0 * eps);
                let vg = volume_gradient(&g, &f, &u).unwrap();
                let dot: f64 = vg.values().iter().zip(v.values()).map(|(a, b)| a * b).sum();
                prop_assert!((dot - fd).abs() <= 1e-6 * fd.abs().max(1e-3), "{} vs {}", dot, fd);
            }
        }
    }
}
