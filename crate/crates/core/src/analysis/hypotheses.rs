//! Which uniqueness theorems apply to a given `(M, f, u)`, judged by
//! numeric proxies for their hypotheses.

use serde::{Deserialize, Serialize};

use super::diagnostics::{angle_gap, gradient_bounds};
use crate::error::Result;
use crate::fiber::{FiberGrid, ScalarField};
use crate::geometry::assemble_state;
use crate::warp::{classify_warping, SampleConfig, WarpClassification, WarpingFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    /// Log-convex, non-locally constant `f` with `|Du| ≤ c f(u)`.
    Propio,
    /// Log-convex `f`, `|Du| ≤ c f(u)`, `u` bounded on one side.
    Nopropio,
    /// Monotone `f` integrable at the finite end it decreases toward.
    Signada1,
    /// Monotone `f`, `u` bounded on the matching side.
    Signada2,
    /// Monotone `f`, bounded `u` with `|Du| ≤ C`.
    Signada2consecuencia,
    /// Product ambient, `Ric ≤ 0`, `|Du| ≤ C`: totally geodesic graph.
    Tgeodesic,
    /// `ℝ × F`, `F` compact with `Ric ≤ 0` and `χ(F) ≠ 0`: affine graphs.
    ProductMoser,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 7] = [
        TheoremTag::Propio,
        TheoremTag::Nopropio,
        TheoremTag::Signada1,
        TheoremTag::Signada2,
        TheoremTag::Signada2consecuencia,
        TheoremTag::Tgeodesic,
        TheoremTag::ProductMoser,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremTag::Propio => "propio",
            TheoremTag::Nopropio => "nopropio",
            TheoremTag::Signada1 => "signada1",
            TheoremTag::Signada2 => "signada2",
            TheoremTag::Signada2consecuencia => "signada2consecuencia",
            TheoremTag::Tgeodesic => "tgeodesic",
            TheoremTag::ProductMoser => "product_moser",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    Constant,
    TotallyGeodesic,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub theorem: TheoremTag,
    pub applicable: bool,
    /// Hypotheses that failed; empty when applicable.
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `max |Du|/f(u)`
    pub gradient_bound_c: f64,
    /// `max |Du|`
    pub gradient_bound_abs: f64,
    /// `min cos θ`
    pub angle_gap: f64,
    pub warping: WarpClassification,
    pub applicable_theorems: Vec<TheoremTag>,
    pub checks: Vec<TheoremCheck>,
    pub predicted_conclusion: Conclusion,
    pub notes: Vec<String>,
}

/// Tolerance for the sign tests on `f'` and `(log f)''`. Loosening it can
/// only add theorems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisConfig {
    pub sign_tol: f64,
    pub sample: SampleConfig,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        Self {
            sign_tol: 1e-12,
            sample: SampleConfig::default(),
        }
    }
}

pub fn hypothesis_report(
    grid: &FiberGrid,
    f: &WarpingFunction,
    u: &ScalarField,
    cfg: &HypothesisConfig,
) -> Result<HypothesisReport> {
    let sample = SampleConfig {
        sign_eps: cfg.sign_tol,
        ..cfg.sample
    };
    let w = classify_warping(f, &sample)?;
    let (c, c_abs) = gradient_bounds(grid, f, u)?;
    let state = assemble_state(grid, f, u)?;
    let gap = angle_gap(&state);
    let n = grid.dim();
    let dom = f.domain();

    let mut notes = vec![
        "fiber is a flat chart: Ric ≡ 0 is taken as non-positive definite; the strict negativity refinement of tgeodesic is not checkable".to_string(),
        "boundedness of u from below/above holds trivially on a finite grid; those hypotheses are vacuous at this scale".to_string(),
        "gradient bounds are finite on any grid; the proxy is the measured constant itself".to_string(),
    ];
    let mut common = Vec::new();
    if grid.is_periodic() {
        notes.push("compact surrogate: the torus stands in for a parabolic fiber (compact manifolds admit no non-constant superharmonic functions)".into());
    } else {
        common.push("a Dirichlet box does not carry an entire solution".to_string());
    }
    if n < 2 {
        common.push(format!("fiber dimension {n} < 2"));
    }

    let mut checks = Vec::new();
    let mut check = |t: TheoremTag, extra: Vec<(bool, &str)>| {
        let mut failed = common.clone();
        failed.extend(extra.into_iter().filter(|(ok, _)| !ok).map(|(_, m)| m.to_string()));
        checks.push(TheoremCheck {
            theorem: t,
            applicable: failed.is_empty(),
            failed,
        });
    };
    let c_ok = c.is_finite();
    let dec = w.monotone.is_non_increasing();
    let inc = w.monotone.is_non_decreasing();
    check(
        TheoremTag::Propio,
        vec![
            (w.positive, "f is not positive"),
            (w.non_locally_constant, "f is locally constant somewhere"),
            (w.log_convex, "(log f)'' < 0 somewhere"),
            (c_ok, "no bound |Du| ≤ c f(u)"),
        ],
    );
    check(
        TheoremTag::Nopropio,
        vec![
            (w.positive, "f is not positive"),
            (w.log_convex, "(log f)'' < 0 somewhere"),
            (c_ok, "no bound |Du| ≤ c f(u)"),
        ],
    );
    let s1_i = dom.a.is_finite() && dec && w.l1_at_a.finite();
    let s1_ii = dom.b.is_finite() && inc && w.l1_at_b.finite();
    check(
        TheoremTag::Signada1,
        vec![
            (w.positive, "f is not positive"),
            (
                s1_i || s1_ii,
                "neither (i) finite a, non-increasing f ∈ L¹(a) nor (ii) finite b, non-decreasing f ∈ L¹(b)",
            ),
            (c_ok, "no bound |Du| ≤ c f(u)"),
        ],
    );
    check(
        TheoremTag::Signada2,
        vec![
            (w.positive, "f is not positive"),
            (w.monotone.is_monotone(), "f is not monotone"),
            (c_ok, "no bound |Du| ≤ C f(u)"),
        ],
    );
    check(
        TheoremTag::Signada2consecuencia,
        vec![
            (w.positive, "f is not positive"),
            (w.monotone.is_monotone(), "f is not monotone"),
            (c_abs.is_finite(), "no bound |Du| ≤ C"),
        ],
    );
    check(
        TheoremTag::Tgeodesic,
        vec![
            (w.is_constant(), "ambient is not a product (f is not constant)"),
            (c_abs.is_finite(), "no bound |Du| ≤ C"),
        ],
    );
    check(
        TheoremTag::ProductMoser,
        vec![
            (w.is_constant(), "ambient is not a product (f is not constant)"),
            (
                false,
                "a flat chart of ℝ × F has F a circle or interval; χ(S¹) = 0 and intervals are not compact without boundary",
            ),
        ],
    );
    let applicable: Vec<TheoremTag> = checks.iter().filter(|c| c.applicable).map(|c| c.theorem).collect();
    let predicted = if applicable.iter().any(|t| {
        matches!(
            t,
            TheoremTag::Propio
                | TheoremTag::Nopropio
                | TheoremTag::Signada1
                | TheoremTag::Signada2
                | TheoremTag::Signada2consecuencia
        )
    }) {
        Conclusion::Constant
    } else if applicable.contains(&TheoremTag::Tgeodesic) {
        Conclusion::TotallyGeodesic
    } else {
        Conclusion::None
    };
    Ok(HypothesisReport {
        gradient_bound_c: c,
        gradient_bound_abs: c_abs,
        angle_gap: gap,
        warping: w,
        applicable_theorems: applicable,
        checks,
        predicted_conclusion: predicted,
        notes,
    })
}
