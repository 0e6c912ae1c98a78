//! Fixtures shared by the benchmarks.

use warpgraph::{FiberGrid, ScalarField, WarpingFunction};

/// Unit 2-torus with a smooth seeded field of moderate slope and `f = cosh`.
pub fn torus_fixture(count: usize) -> (FiberGrid, WarpingFunction, ScalarField) {
    let g = FiberGrid::unit_torus(2, count).expect("count is at least the minimum");
    let u = ScalarField::random_smooth(g, 0.05, 3, 7);
    (g, WarpingFunction::cosh(), u)
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixture_shape() {
        let (g, _, u) = super::torus_fixture(16);
        assert_eq!(u.len(), g.len());
        assert!(u.max_abs() <= 0.05 + 1e-15);
    }
}
