//! Graphs `u = u(x)` over the surface `dx² + φ(x)² dy²`, where everything
//! reduces to one variable. Used for the one-dimensional counterexamples,
//! where the ambient space is the product `ℝ × M` and solutions satisfy the
//! first integral `φ u'/√(1 + u'²) = C`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};
use crate::warp::WarpingFunction;

pub type ProfileFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// A profile `x ↦ [u, u', u'']` with analytic derivatives.
#[derive(Clone)]
pub struct Profile {
    label: String,
    eval: ProfileFn,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({})", self.label)
    }
}

impl Profile {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    /// `tanh x`; `u'` is computed as `1/cosh² x` to keep full relative
    /// precision in the tails.
    pub fn tanh() -> Self {
        Self::new("tanh", |x: f64| {
            let t = x.tanh();
            let c = x.cosh();
            let s = 1.0 / (c * c);
            [t, s, -2.0 * s * t]
        })
    }

    /// `x + arctan x`
    pub fn x_plus_arctan() -> Self {
        Self::new("x+arctan", |x: f64| {
            let q = 1.0 + x * x;
            [x + x.atan(), 1.0 + 1.0 / q, -2.0 * x / (q * q)]
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| [c, 0.0, 0.0])
    }

    pub fn affine(slope: f64, offset: f64) -> Self {
        Self::new(format!("{slope}x+{offset}"), move |x| {
            [slope * x + offset, slope, 0.0]
        })
    }

    /// `λ u`
    pub fn scaled(&self, lambda: f64) -> Self {
        let e = self.eval.clone();
        Self::new(format!("{lambda}*{}", self.label), move |x| {
            let [u, d1, d2] = e(x);
            [lambda * u, lambda * d1, lambda * d2]
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, x: f64) -> [f64; 3] {
        (self.eval)(x)
    }
}

/// `count` equispaced points on `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![a];
    }
    let h = (b - a) / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { b } else { a + h * i as f64 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegral {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub median: f64,
    /// `max |C − median C|`
    pub deviation: f64,
}

impl FirstIntegral {
    /// `max |C − c|`
    pub fn deviation_from(&self, c: f64) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max((v - c).abs()))
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let m = s.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    }
}

/// `C(x) = φ(x) u'(x) / √(1 + u'(x)²)` at each sample.
pub fn first_integral_1d(phi: &WarpingFunction, u: &Profile, xs: &[f64]) -> FirstIntegral {
    let values: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let d = u.eval(x)[1];
            phi.value(x) * d / (1.0 + d * d).sqrt()
        })
        .collect();
    let median = median(&values);
    let deviation = values.iter().fold(0.0f64, |m, v| m.max((v - median).abs()));
    FirstIntegral {
        xs: xs.to_vec(),
        values,
        median,
        deviation,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub xs: Vec<f64>,
    pub us: Vec<f64>,
    /// Largest quadrature error estimate accumulated along either branch.
    pub error_estimate: f64,
    /// Whether the whole span was covered.
    pub complete: bool,
    /// `[lo, hi]` actually reached; narrower than the span when `φ² − C²`
    /// vanished first.
    pub reach: [f64; 2],
}

/// Integrate `u' = C / √(φ(x)² − C²)` from `(x0, u0)` across `span`,
/// sampled at `count` equispaced points. The right side depends on `x`
/// only, so each sample is a cumulative adaptive quadrature.
pub fn ode_solve_1d(
    phi: &WarpingFunction,
    c: f64,
    x0: f64,
    u0: f64,
    span: [f64; 2],
    count: usize,
) -> Result<OdeSolution> {
    let [lo, hi] = span;
    if !(lo < hi) || x0 < lo || x0 > hi || count < 2 {
        return Err(Error::Config(format!(
            "x0 = {x0} must lie in the span [{lo}, {hi}] with at least two samples"
        )));
    }
    let gap = |x: f64| {
        let p = phi.value(x);
        p * p - c * c
    };
    if !(gap(x0) > 0.0) {
        return Err(Error::Hypothesis(format!(
            "φ(x0)² − C² = {} is not positive",
            gap(x0)
        )));
    }
    let rhs = |x: f64| c / gap(x).sqrt();
    let qc = QuadConfig {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        ..QuadConfig::default()
    };
    let grid = linspace(lo, hi, count);
    let split = grid.partition_point(|&x| x < x0);
    let mut err = 0.0f64;
    let mut reach = [lo, hi];
    let mut complete = true;

    // forward branch
    let mut fwd = Vec::new();
    let (mut xp, mut up) = (x0, u0);
    for &x in &grid[split..] {
        if !(gap(x) > 0.0) {
            reach[1] = xp;
            complete = false;
            break;
        }
        let q = integrate(rhs, xp, x, &qc);
        if !q.converged || !q.value.is_finite() {
            reach[1] = xp;
            complete = false;
            break;
        }
        up += q.value;
        err += q.abs_error;
        xp = x;
        fwd.push((x, up));
    }
    // backward branch
    let mut bwd = Vec::new();
    let (mut xp, mut up) = (x0, u0);
    let mut berr = 0.0;
    for &x in grid[..split].iter().rev() {
        if !(gap(x) > 0.0) {
            reach[0] = xp;
            complete = false;
            break;
        }
        let q = integrate(rhs, xp, x, &qc);
        if !q.converged || !q.value.is_finite() {
            reach[0] = xp;
            complete = false;
            break;
        }
        up += q.value;
        berr += q.abs_error;
        xp = x;
        bwd.push((x, up));
    }
    bwd.reverse();
    let (xs, us) = bwd.into_iter().chain(fwd).unzip();
    Ok(OdeSolution {
        xs,
        us,
        error_estimate: err.max(berr),
        complete,
        reach,
    })
}

/// Minimal-surface residual of `y ↦ (x, y, u(x))` in `I ×_f M²`, with
/// `M² = (ℝ², dx² + φ² dy²)`, evaluated analytically:
///
/// `R = (φ'/φ) X + X' − (f'/W)(2 − u'²/f²)`, `X = u'/(fW)`, `W = √(f² + u'²)`.
pub fn reduced_residual(f: &WarpingFunction, phi: &WarpingFunction, u: &Profile, x: f64) -> f64 {
    let [t, d1, d2] = u.eval(x);
    let [a, a1, _] = f.eval3(t);
    let [p, p1, _] = phi.eval3(x);
    let w = (a * a + d1 * d1).sqrt();
    let dw = (a * a1 * d1 + d1 * d2) / w;
    let xf = d1 / (a * w);
    let dxf = d2 / (a * w) - d1 * (a1 * d1 * w + a * dw) / (a * w).powi(2);
    (p1 / p) * xf + dxf - (a1 / w) * (2.0 - d1 * d1 / (a * a))
}

/// `Δ sech² x` on `dx² + φ² dy²`, i.e. `s'' + (φ'/φ) s'`.
pub fn sech_sq_laplacian(phi: &WarpingFunction, x: f64) -> f64 {
    let c = x.cosh();
    let s = 1.0 / (c * c);
    let t = x.tanh();
    let ds = -2.0 * s * t;
    let dds = 4.0 * s * t * t - 2.0 * s * s;
    let [p, p1, _] = phi.eval3(x);
    dds + (p1 / p) * ds
}

/// The closed form `2[(cosh²x − 1)² + 2] / [cosh⁴x (1 + cosh⁴x)]` printed
/// for the Laplacian of the counterexample witness. Its negative is
/// `Δ sech² x` on `dx² + (1 + cosh⁴x) dy²`.
pub fn sech_sq_displayed(x: f64) -> f64 {
    let c = x.cosh().powi(2);
    2.0 * ((c - 1.0).powi(2) + 2.0) / (c * c * (1.0 + c * c))
}
