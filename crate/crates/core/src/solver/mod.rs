//! Discrete volume, nonlinear solvers for the minimal-surface equation, the
//! one-dimensional reduction and the ψ change of variable.

pub mod flow;
pub mod linalg;
pub mod newton;
pub mod reduced;
pub mod transform;
mod volume;

pub use flow::{flow_relax, stable_dt, FlowOutput};
pub use linalg::{banded_solve, gmres, Csr, GmresConfig, LinearOutcome};
pub use newton::{
    solve_minimal, LinearConfig, Method, SolverConfig, SolverReport, CONSTANCY_TOL,
};
pub use reduced::{
    first_integral_1d, linspace, ode_solve_1d, reduced_residual, sech_sq_displayed,
    sech_sq_laplacian, FirstIntegral, OdeSolution, Profile,
};
pub use transform::{
    inverse_psi, phi_map, reduced_transformed_residual, transform_psi, transformed_residual, Psi,
};
pub use volume::{volume, volume_gradient};
