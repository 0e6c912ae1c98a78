//! Theorem-hypothesis checks, quasi-isometry certificates, superharmonic
//! witness scans and the area growth of minimal graphs in `ℝ³`.

mod area;
mod diagnostics;
mod hypotheses;

pub use area::{ball_area_growth, AreaGrowth};
pub use diagnostics::{
    angle_gap, gradient_bound_constant, product_sandwich, quasi_isometry_check,
    superharmonic_scan, QuasiIsometry, Sandwich, ScanReport,
};
pub use hypotheses::{
    hypothesis_report, Conclusion, HypothesisConfig, HypothesisReport, TheoremCheck, TheoremTag,
};
