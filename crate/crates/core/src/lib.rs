//! Minimal graphs in warped products `I ×_f M`: warping functions, fiber
//! discretization, graph geometry, solvers for the minimal-surface equation
//! and theorem-hypothesis diagnostics.

pub mod analysis;
pub mod error;
pub mod fiber;
pub mod geometry;
pub mod quad;
pub mod solver;
pub mod warp;

pub use analysis::{
    ball_area_growth, gradient_bound_constant, hypothesis_report, quasi_isometry_check,
    superharmonic_scan, AreaGrowth, Conclusion, HypothesisConfig, HypothesisReport, TheoremTag,
};
pub use error::{Error, Result};
pub use warp::{
    classify_warping, endpoint_integral, Bundle, EndpointConfig, EndpointIntegral, Integrability,
    IntervalDomain, Monotonicity, Preset, SampleConfig, Side, WarpClassification, WarpingFunction,
};
pub use fiber::{
    grad_norm_sq, laplace_beltrami, metric_eigen_bounds, metric_matrix, BoundaryPolicy,
    FiberGrid, MetricKind, MetricTag, ScalarField, SymMat, Topology, VectorField,
};
pub use geometry::{
    assemble_state, formula_laplacian, identity_report, ms_residual, witness_field, GraphState,
    Identity, IdentityReport, WitnessKind,
};
pub use solver::{
    first_integral_1d, flow_relax, ode_solve_1d, solve_minimal, transform_psi,
    transformed_residual, volume, volume_gradient, Method, Profile, Psi, SolverConfig,
    SolverReport,
};
