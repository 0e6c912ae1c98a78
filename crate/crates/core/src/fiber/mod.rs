//! Discretized flat fibers and metric-aware differential operators.

mod field;
mod grid;
pub mod io;
mod metric;
pub mod ops;

pub use field::{FieldStats, ScalarField, VectorField};
pub use grid::{BoundaryPolicy, FiberGrid, Topology, MIN_COUNT};
pub use metric::{
    check_range, grad_norm_sq, laplace_beltrami, metric_eigen_bounds, metric_field,
    metric_matrix, MetricKind, MetricTag, SymMat,
};
pub use ops::{divergence, gradient};
