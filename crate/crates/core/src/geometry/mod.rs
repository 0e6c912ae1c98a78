//! Extrinsic geometry of graphs `Σ_u` and the Laplacian identities used by
//! the uniqueness arguments.

mod formulas;
mod identity;
mod residual;
mod state;
mod witness;

pub use formulas::{
    arccot_display_form, discrete_laplacian, formula_laplacian, formula_laplacian_minimal,
    Identity,
};
pub use identity::{
    fitted_order, identity_report, FieldFn, IdentityProblem, IdentityReport, LevelGap, EXACT_GAP,
};
pub use residual::{
    density_terms, euler_lagrange, ms_residual, ms_residual_divergence_form, DensityTerms,
};
pub(crate) use residual::{all_terms, ginv};
pub use state::{assemble_state, shape_operator, GraphState};
pub use witness::{integral_of_warp, primitive_field, witness_field, WitnessKind};
