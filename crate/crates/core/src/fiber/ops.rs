//! Coordinate finite-difference operators.
//!
//! The first-derivative stencil is central (second order) everywhere on a
//! torus; on a box the edge nodes use the one-sided second-order stencil.
//! Divergence applies the same stencil to each component, so on a torus it
//! is exactly the negative adjoint of the gradient.

use super::field::{ScalarField, VectorField};
use super::grid::FiberGrid;
use crate::error::{Error, Result};

/// Up to three `(node, coefficient)` pairs; unused slots carry weight 0.
pub type Stencil = [(usize, f64); 3];

#[inline]
pub fn diff_stencil(grid: &FiberGrid, node: usize, axis: usize) -> Stencil {
    let h = grid.spacing(axis);
    let c = 0.5 / h;
    if grid.is_periodic() {
        return [
            (grid.wrap(node, axis, 1), c),
            (grid.wrap(node, axis, -1), -c),
            (node, 0.0),
        ];
    }
    let i = grid.axis_index(node, axis);
    let n = grid.count(axis);
    if i == 0 {
        [
            (node, -3.0 * c),
            (grid.wrap(node, axis, 1), 4.0 * c),
            (grid.wrap(node, axis, 2), -c),
        ]
    } else if i + 1 == n {
        [
            (node, 3.0 * c),
            (grid.wrap(node, axis, -1), -4.0 * c),
            (grid.wrap(node, axis, -2), c),
        ]
    } else {
        [
            (grid.wrap(node, axis, 1), c),
            (grid.wrap(node, axis, -1), -c),
            (node, 0.0),
        ]
    }
}

#[inline]
pub fn diff_at(grid: &FiberGrid, vals: &[f64], node: usize, axis: usize) -> f64 {
    diff_stencil(grid, node, axis)
        .iter()
        .map(|&(q, c)| c * vals[q])
        .sum()
}

/// Coordinate gradient at a node (unused trailing entry is 0 when n = 1).
#[inline]
pub fn grad_at(grid: &FiberGrid, vals: &[f64], node: usize) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (k, gk) in g.iter_mut().enumerate().take(grid.dim()) {
        *gk = diff_at(grid, vals, node, k);
    }
    g
}

/// Second derivative along one axis: compact 3-point stencil, one-sided
/// 4-point stencil at box edges.
pub fn second_diff_at(grid: &FiberGrid, vals: &[f64], node: usize, axis: usize) -> f64 {
    let h2 = grid.spacing(axis).powi(2);
    let at = |o: isize| vals[grid.wrap(node, axis, o)];
    if !grid.is_periodic() {
        let i = grid.axis_index(node, axis);
        let n = grid.count(axis);
        if i == 0 {
            return (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2;
        }
        if i + 1 == n {
            return (2.0 * at(0) - 5.0 * at(-1) + 4.0 * at(-2) - at(-3)) / h2;
        }
    }
    (at(1) - 2.0 * at(0) + at(-1)) / h2
}

/// Coordinate Hessian at a node; the mixed entry composes the two
/// first-derivative stencils.
pub fn hessian_at(grid: &FiberGrid, vals: &[f64], node: usize) -> [[f64; 2]; 2] {
    let mut hess = [[0.0; 2]; 2];
    for k in 0..grid.dim() {
        hess[k][k] = second_diff_at(grid, vals, node, k);
    }
    if grid.dim() == 2 {
        let mut xy = 0.0;
        for &(q, c) in diff_stencil(grid, node, 0).iter() {
            if c != 0.0 {
                xy += c * diff_at(grid, vals, q, 1);
            }
        }
        hess[0][1] = xy;
        hess[1][0] = xy;
    }
    hess
}

pub(crate) fn check_grid(grid: &FiberGrid, other: &FiberGrid) -> Result<()> {
    if !grid.same_shape(other) {
        return Err(Error::Shape {
            expected: grid.len(),
            got: other.len(),
        });
    }
    Ok(())
}

pub fn gradient(grid: &FiberGrid, phi: &ScalarField) -> Result<VectorField> {
    check_grid(grid, phi.grid())?;
    let n = grid.dim();
    let v = phi.values();
    let mut data = Vec::with_capacity(n * grid.len());
    for p in 0..grid.len() {
        for k in 0..n {
            data.push(diff_at(grid, v, p, k));
        }
    }
    VectorField::new(*grid, data)
}

/// Divergence of components given as flat node-major data (`n` per node).
pub fn divergence_raw(grid: &FiberGrid, data: &[f64]) -> Vec<f64> {
    let n = grid.dim();
    (0..grid.len())
        .map(|p| {
            let mut s = 0.0;
            for k in 0..n {
                for &(q, c) in diff_stencil(grid, p, k).iter() {
                    s += c * data[q * n + k];
                }
            }
            s
        })
        .collect()
}

pub fn divergence(grid: &FiberGrid, x: &VectorField) -> Result<ScalarField> {
    check_grid(grid, x.grid())?;
    ScalarField::new(*grid, divergence_raw(grid, x.data()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn constant_has_zero_gradient() {
        let g = FiberGrid::unit_torus(2, 12).unwrap();
        let d = gradient(&g, &ScalarField::constant(g, 3.0)).unwrap();
        assert!(d.data().iter().all(|v| *v == 0.0));
        let b = FiberGrid::bounded(&[0.0, 0.0], &[1.0, 1.0], &[9, 9]).unwrap();
        let d = gradient(&b, &ScalarField::constant(b, 3.0)).unwrap();
        assert!(d.data().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn periodic_sine_gradient_is_second_order() {
        let err = |n: usize| {
            let g = FiberGrid::periodic(&[2.0], &[n]).unwrap();
            let phi = ScalarField::from_fn(g, |x, _| (TAU * x / 2.0).sin());
            let d = gradient(&g, &phi).unwrap();
            (0..n)
                .map(|p| {
                    let x = g.coord(p)[0];
                    (d.at(p)[0] - (TAU / 2.0) * (TAU * x / 2.0).cos()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 < 0.05);
        assert!((e1 / e2).log2() > 1.95);
    }

    #[test]
    fn affine_gradient_exact_on_box() {
        let g = FiberGrid::bounded(&[0.0], &[1.0], &[11]).unwrap();
        let phi = ScalarField::from_fn(g, |x, _| x);
        let d = gradient(&g, &phi).unwrap();
        for p in 0..g.len() {
            assert!((d.at(p)[0] - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_divergence_of_cosine() {
        let g = FiberGrid::periodic(&[1.0], &[128]).unwrap();
        let x = VectorField::from_fn(g, |x, _| [(TAU * x).cos(), 0.0]);
        let d = divergence(&g, &x).unwrap();
        for p in 0..g.len() {
            let xv = g.coord(p)[0];
            assert!((d.values()[p] + TAU * (TAU * xv).sin()).abs() < 1e-2);
        }
        let c = VectorField::from_fn(g, |_, _| [2.0, 0.0]);
        assert!(divergence(&g, &c).unwrap().values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn div_grad_is_wide_laplacian_stencil() {
        let g = FiberGrid::periodic(&[1.0, 2.0], &[10, 12]).unwrap();
        let phi = ScalarField::random_smooth(g, 1.0, 4, 3);
        let lap = divergence(&g, &gradient(&g, &phi).unwrap()).unwrap();
        let v = phi.values();
        for p in 0..g.len() {
            let mut s = 0.0;
            for k in 0..2 {
                let h = g.spacing(k);
                s += (v[g.wrap(p, k, 2)] - 2.0 * v[p] + v[g.wrap(p, k, -2)]) / (4.0 * h * h);
            }
            assert!((lap.values()[p] - s).abs() < 1e-10 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn hessian_of_quadratic_is_exact() {
        let g = FiberGrid::bounded(&[-1.0, -1.0], &[2.0, 2.0], &[9, 9]).unwrap();
        let phi = ScalarField::from_fn(g, |x, y| 1.5 * x * x - 0.5 * x * y + 2.0 * y * y + x);
        for p in 0..g.len() {
            let h = hessian_at(&g, phi.values(), p);
            assert!((h[0][0] - 3.0).abs() < 1e-9);
            assert!((h[1][1] - 4.0).abs() < 1e-9);
            assert!((h[0][1] + 0.5).abs() < 1e-9);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn summation_by_parts_on_torus(
                nx in 4usize..14, ny in 4usize..14, lx in 0.5f64..3.0, ly in 0.5f64..3.0,
                seed in any::<u64>(), gx in 0.2f64..5.0, gy in 0.2f64..5.0,
            ) {
                use rand::{Rng, SeedableRng};
                let g = FiberGrid::periodic(&[lx, ly], &[nx, ny]).unwrap()
                    .with_fiber_metric(&[gx, gy]).unwrap();
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let phi = ScalarField::new(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
                let xdata: Vec<f64> = (0..2 * g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let x = VectorField::new(g, xdata.clone()).unwrap();
                // ⟨Dφ, X⟩ in coordinates vs −⟨φ, div X⟩
                let grad = gradient(&g, &phi).unwrap();
                let lhs: f64 = (0..g.len()).map(|p| {
                    g.cell_measure(p) * (grad.at(p)[0] * x.at(p)[0] + grad.at(p)[1] * x.at(p)[1])
                }).sum();
                let rhs = -phi.inner(&divergence(&g, &x).unwrap());
                prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
            }
        }
    }
}
