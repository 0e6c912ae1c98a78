//! Warping functions `f` on an open interval and their hypothesis
//! classification (positivity, monotonicity, log-convexity, endpoint
//! integrability).

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};

/// Open interval `(a, b)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalDomain {
    pub a: f64,
    pub b: f64,
}

impl IntervalDomain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::InvalidWarping(format!(
                "interval ({a}, {b}) is empty"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn real_line() -> Self {
        Self {
            a: f64::NEG_INFINITY,
            b: f64::INFINITY,
        }
    }

    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        t > self.a && t < self.b
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain {
                t,
                a: self.a,
                b: self.b,
            })
        }
    }

    pub fn span(&self) -> f64 {
        self.b - self.a
    }

    /// Interior reference point: the midpoint of a finite interval, one unit
    /// inside the finite end of a half-line, or 0 on the whole line.
    pub fn anchor(&self) -> f64 {
        match (self.a.is_finite(), self.b.is_finite()) {
            (true, true) => 0.5 * (self.a + self.b),
            (true, false) => self.a + 1.0,
            (false, true) => self.b - 1.0,
            (false, false) => 0.0,
        }
    }

    /// Finite window used for sampling; infinite ends are replaced by
    /// `anchor ∓ half_width`.
    pub fn window(&self, half_width: f64) -> (f64, f64) {
        let c = self.anchor();
        let lo = if self.a.is_finite() { self.a } else { c - half_width };
        let hi = if self.b.is_finite() { self.b } else { c + half_width };
        (lo, hi)
    }
}

/// Warpings with hand-coded analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// f ≡ 1
    Constant,
    /// f = cosh t
    Cosh,
    /// f = eᵗ
    Exp,
    /// f = √(1 + cosh⁴ t)
    CounterA,
    /// h = √(2t⁴ + 6t² + 5) / (t² + 2)
    CounterB,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Constant,
        Preset::Cosh,
        Preset::Exp,
        Preset::CounterA,
        Preset::CounterB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Constant => "constant",
            Preset::Cosh => "cosh",
            Preset::Exp => "exp",
            Preset::CounterA => "counter-a",
            Preset::CounterB => "counter-b",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// `[f, f', f'', (log f)'']`
    fn eval(self, t: f64) -> [f64; 4] {
        match self {
            Preset::Constant => [1.0, 0.0, 0.0, 0.0],
            Preset::Cosh => {
                let c = t.cosh();
                [c, t.sinh(), c, 1.0 / (c * c)]
            }
            Preset::Exp => {
                let e = t.exp();
                [e, e, e, 0.0]
            }
            Preset::CounterA => {
                let c = t.cosh();
                let c2 = c * c;
                let f = (1.0 + c2 * c2).sqrt();
                let r = 1.0 / c2;
                let r2 = r * r;
                let dlog = 2.0 * t.tanh() / (1.0 + r2);
                let d2log = (2.0 * r + 8.0 * r2 - 6.0 * r2 * r) / ((1.0 + r2) * (1.0 + r2));
                [f, f * dlog, f * (d2log + dlog * dlog), d2log]
            }
            Preset::CounterB => {
                let t2 = t * t;
                let p = 2.0 * t2 * t2 + 6.0 * t2 + 5.0;
                let dp = 8.0 * t2 * t + 12.0 * t;
                let ddp = 24.0 * t2 + 12.0;
                let q = t2 + 2.0;
                let h = p.sqrt() / q;
                let dlog = 0.5 * dp / p - 2.0 * t / q;
                let d2log = 0.5 * (ddp * p - dp * dp) / (p * p) - (4.0 - 2.0 * t2) / (q * q);
                [h, h * dlog, h * (d2log + dlog * dlog), d2log]
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// User-supplied analytic warping: `t ↦ [f, f', f'']`.
pub type WarpFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// Clamped cubic spline through `(t_i, y_i)`; endpoint slopes come from the
/// cubic through the four nearest samples.
#[derive(Debug, Clone)]
pub struct CubicTable {
    t: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

fn lagrange_slope(ts: &[f64], ys: &[f64], at: f64) -> f64 {
    let k = ts.len();
    let mut slope = 0.0;
    for i in 0..k {
        let mut denom = 1.0;
        for j in 0..k {
            if j != i {
                denom *= ts[i] - ts[j];
            }
        }
        let mut num = 0.0;
        for l in 0..k {
            if l == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..k {
                if j != i && j != l {
                    prod *= at - ts[j];
                }
            }
            num += prod;
        }
        slope += ys[i] * num / denom;
    }
    slope
}

impl CubicTable {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if t.len() != y.len() {
            return Err(Error::InvalidWarping("table columns differ in length".into()));
        }
        if t.len() < 4 {
            return Err(Error::InvalidWarping("table needs at least 4 samples".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidWarping("table abscissae must increase strictly".into()));
        }
        if let Some(i) = y.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidWarping(format!(
                "table value f({}) = {} is not positive",
                t[i], y[i]
            )));
        }
        let n = t.len();
        let s0 = lagrange_slope(&t[..4], &y[..4], t[0]);
        let sn = lagrange_slope(&t[n - 4..], &y[n - 4..], t[n - 1]);
        // tridiagonal system for second derivatives
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let h0 = t[1] - t[0];
        diag[0] = 2.0 * h0;
        sup[0] = h0;
        rhs[0] = 6.0 * ((y[1] - y[0]) / h0 - s0);
        for i in 1..n - 1 {
            let hl = t[i] - t[i - 1];
            let hr = t[i + 1] - t[i];
            sub[i] = hl;
            diag[i] = 2.0 * (hl + hr);
            sup[i] = hr;
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl);
        }
        let hn = t[n - 1] - t[n - 2];
        sub[n - 1] = hn;
        diag[n - 1] = 2.0 * hn;
        rhs[n - 1] = 6.0 * (sn - (y[n - 1] - y[n - 2]) / hn);
        let m = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        Ok(Self { t, y, m })
    }

    pub fn domain(&self) -> IntervalDomain {
        IntervalDomain {
            a: self.t[0],
            b: self.t[self.t.len() - 1],
        }
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.t, &self.y)
    }

    fn eval(&self, x: f64) -> [f64; 3] {
        let n = self.t.len();
        let i = match self.t.partition_point(|&v| v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / 6.0;
        let d1 = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * mi
            + (3.0 * b * b - 1.0) / 6.0 * h * mj;
        let d2 = a * mi + b * mj;
        [v, d1, d2]
    }
}

pub(crate) fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[derive(Clone)]
pub enum WarpKind {
    Preset(Preset),
    Tabulated(Arc<CubicTable>),
    Custom { label: String, eval: WarpFn },
}

impl fmt::Debug for WarpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WarpKind::Preset(p) => write!(f, "Preset({p})"),
            WarpKind::Tabulated(t) => write!(f, "Tabulated({} samples)", t.t.len()),
            WarpKind::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// A positive warping function with two derivatives on an open interval.
#[derive(Debug, Clone)]
pub struct WarpingFunction {
    domain: IntervalDomain,
    kind: WarpKind,
    scale: f64,
}

/// `(f, f', f'', (log f)'')` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
    pub log_d2: f64,
}

impl WarpingFunction {
    pub fn preset(p: Preset) -> Self {
        Self {
            domain: IntervalDomain::real_line(),
            kind: WarpKind::Preset(p),
            scale: 1.0,
        }
    }

    pub fn constant() -> Self {
        Self::preset(Preset::Constant)
    }

    pub fn cosh() -> Self {
        Self::preset(Preset::Cosh)
    }

    pub fn exp() -> Self {
        Self::preset(Preset::Exp)
    }

    pub fn custom<F>(label: impl Into<String>, domain: IntervalDomain, eval: F) -> Self
    where
        F: Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    {
        Self {
            domain,
            kind: WarpKind::Custom {
                label: label.into(),
                eval: Arc::new(eval),
            },
            scale: 1.0,
        }
    }

    pub fn tabulated(table: CubicTable) -> Self {
        Self {
            domain: table.domain(),
            kind: WarpKind::Tabulated(Arc::new(table)),
            scale: 1.0,
        }
    }

    /// Load a two-column `(t, f)` CSV table; a non-numeric first row is
    /// treated as a header.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path.as_ref())?;
        let mut ts = Vec::new();
        let mut ys = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Format(format!("row {row}: expected two columns")));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(t), Ok(y)) => {
                    ts.push(t);
                    ys.push(y);
                }
                _ if row == 0 => continue,
                _ => return Err(Error::Format(format!("row {row}: non-numeric entry"))),
            }
        }
        Ok(Self::tabulated(CubicTable::new(ts, ys)?))
    }

    /// Restrict to a sub-interval of the current domain.
    pub fn with_domain(mut self, domain: IntervalDomain) -> Result<Self> {
        if domain.a < self.domain.a || domain.b > self.domain.b {
            return Err(Error::InvalidWarping(format!(
                "({}, {}) is not inside ({}, {})",
                domain.a, domain.b, self.domain.a, self.domain.b
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    /// `λ f`, λ > 0.
    pub fn scaled(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidWarping(format!("scale {lambda} must be positive")));
        }
        self.scale *= lambda;
        Ok(self)
    }

    pub fn domain(&self) -> IntervalDomain {
        self.domain
    }

    pub fn kind(&self) -> &WarpKind {
        &self.kind
    }

    /// Constant factor applied by [`WarpingFunction::scaled`].
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn label(&self) -> String {
        let base = match &self.kind {
            WarpKind::Preset(p) => p.name().to_string(),
            WarpKind::Tabulated(_) => "table".to_string(),
            WarpKind::Custom { label, .. } => label.clone(),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*{base}", self.scale)
        }
    }

    pub fn is_preset(&self, p: Preset) -> bool {
        matches!(self.kind, WarpKind::Preset(q) if q == p)
    }

    /// Unchecked `[f, f', f'', (log f)'']`.
    #[inline]
    pub fn eval4(&self, t: f64) -> [f64; 4] {
        let s = self.scale;
        match &self.kind {
            WarpKind::Preset(p) => {
                let [f, d1, d2, l] = p.eval(t);
                [s * f, s * d1, s * d2, l]
            }
            WarpKind::Tabulated(tab) => {
                let [f, d1, d2] = tab.eval(t);
                [s * f, s * d1, s * d2, (d2 * f - d1 * d1) / (f * f)]
            }
            WarpKind::Custom { eval, .. } => {
                let [f, d1, d2] = eval(t);
                [s * f, s * d1, s * d2, (d2 * f - d1 * d1) / (f * f)]
            }
        }
    }

    /// Unchecked `[f, f', f'']`.
    #[inline]
    pub fn eval3(&self, t: f64) -> [f64; 3] {
        let [f, d1, d2, _] = self.eval4(t);
        [f, d1, d2]
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.eval4(t)[0]
    }

    pub fn eval_bundle(&self, t: f64) -> Result<Bundle> {
        self.domain.check(t)?;
        let [f, d1, d2, log_d2] = self.eval4(t);
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::InvalidWarping(format!("f({t}) = {f} is not positive")));
        }
        Ok(Bundle { f, d1, d2, log_d2 })
    }
}

// ---------------------------------------------------------------------------
// endpoint integrability

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrability {
    Finite,
    Divergent,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Interior point `c`; defaults to [`IntervalDomain::anchor`].
    pub anchor: Option<f64>,
    pub quad: QuadConfig,
    pub max_pieces: usize,
    /// Partial sums above this are declared divergent.
    pub divergence_cap: f64,
    /// Consecutive piece ratios must stay below this to count as decaying.
    pub shrink_ratio: f64,
    /// Accept once the geometric tail estimate is below this fraction of the sum.
    pub tail_rel_tol: f64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            anchor: None,
            quad: QuadConfig {
                abs_tol: 1e-15,
                rel_tol: 1e-12,
                max_subdivisions: 500,
            },
            max_pieces: 96,
            divergence_cap: 1e12,
            shrink_ratio: 0.9,
            tail_rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointIntegral {
    pub side: Side,
    pub anchor: f64,
    pub status: Integrability,
    /// Only reported when `status` is `Finite`.
    pub value: Option<f64>,
    pub error_estimate: f64,
    pub pieces: usize,
}

impl EndpointIntegral {
    pub fn finite(&self) -> bool {
        self.status == Integrability::Finite
    }
}

/// Decide whether `∫_a^c f` (side A) or `∫_c^b f` (side B) is finite by
/// summing pieces that approach the endpoint: dyadic towards a finite end,
/// doubling windows towards an infinite one.
pub fn endpoint_integral(
    f: &WarpingFunction,
    side: Side,
    cfg: &EndpointConfig,
) -> Result<EndpointIntegral> {
    let dom = f.domain();
    let c = cfg.anchor.unwrap_or_else(|| dom.anchor());
    dom.check(c)?;
    let end = match side {
        Side::A => dom.a,
        Side::B => dom.b,
    };
    let dir = if side == Side::A { -1.0 } else { 1.0 };
    // piece k spans the distances [lo_k, hi_k] from c, towards the endpoint
    let piece = |k: usize| -> (f64, f64) {
        if end.is_finite() {
            let d = (end - c).abs();
            let hi = d * 0.5f64.powi(k as i32);
            let lo = hi * 0.5;
            (d - hi, d - lo)
        } else if k == 0 {
            (0.0, 1.0)
        } else {
            (2f64.powi(k as i32 - 1), 2f64.powi(k as i32))
        }
    };
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut prev: Option<f64> = None;
    let mut ratios: Vec<f64> = Vec::new();
    let mut pieces = 0;
    let value_of = |x: f64| f.value(x);
    for k in 0..cfg.max_pieces {
        let (d0, d1) = piece(k);
        let (x0, x1) = (c + dir * d0, c + dir * d1);
        let width = (x1 - x0).abs();
        if end.is_finite() && width <= 64.0 * f64::EPSILON * end.abs().max(1.0) {
            break;
        }
        let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
        let r = quad::integrate(value_of, lo, hi, &cfg.quad);
        if !r.value.is_finite() {
            return Ok(EndpointIntegral {
                side,
                anchor: c,
                status: Integrability::Divergent,
                value: None,
                error_estimate: f64::INFINITY,
                pieces: k + 1,
            });
        }
        pieces = k + 1;
        sum += r.value;
        err += r.abs_error;
        if sum > cfg.divergence_cap {
            return Ok(EndpointIntegral {
                side,
                anchor: c,
                status: Integrability::Divergent,
                value: None,
                error_estimate: f64::INFINITY,
                pieces,
            });
        }
        if let Some(p) = prev {
            if p > 0.0 {
                ratios.push(r.value / p);
            } else {
                ratios.push(if r.value > 0.0 { f64::INFINITY } else { 0.0 });
            }
        }
        prev = Some(r.value);
        if ratios.len() >= 3 {
            let last = &ratios[ratios.len() - 3..];
            let rho = last.iter().cloned().fold(0.0, f64::max);
            if rho < cfg.shrink_ratio {
                let tail = r.value * rho / (1.0 - rho);
                if tail <= cfg.tail_rel_tol * sum.abs().max(f64::MIN_POSITIVE) {
                    return Ok(EndpointIntegral {
                        side,
                        anchor: c,
                        status: Integrability::Finite,
                        value: Some(sum + tail),
                        error_estimate: err + tail,
                        pieces,
                    });
                }
            }
        }
    }
    let tail_ratio = if ratios.len() >= 5 {
        let last = &ratios[ratios.len() - 5..];
        last.iter().sum::<f64>() / 5.0
    } else {
        f64::NAN
    };
    let status = if tail_ratio >= 0.95 {
        Integrability::Divergent
    } else if let (Some(p), true) = (prev, tail_ratio < cfg.shrink_ratio) {
        // decaying but the tolerance was not reached before the pieces ran out
        let tail = p * tail_ratio / (1.0 - tail_ratio);
        return Ok(EndpointIntegral {
            side,
            anchor: c,
            status: Integrability::Finite,
            value: Some(sum + tail),
            error_estimate: err + tail,
            pieces,
        });
    } else {
        Integrability::Indeterminate
    };
    Ok(EndpointIntegral {
        side,
        anchor: c,
        status,
        value: None,
        error_estimate: err,
        pieces,
    })
}

// ---------------------------------------------------------------------------
// classification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    NonIncreasing,
    NonDecreasing,
    NonMonotone,
    Constant,
}

impl Monotonicity {
    pub fn is_non_increasing(self) -> bool {
        matches!(self, Monotonicity::NonIncreasing | Monotonicity::Constant)
    }

    pub fn is_non_decreasing(self) -> bool {
        matches!(self, Monotonicity::NonDecreasing | Monotonicity::Constant)
    }

    pub fn is_monotone(self) -> bool {
        self != Monotonicity::NonMonotone
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub points: usize,
    /// Half-width of the sampling window past an infinite endpoint.
    pub window: f64,
    /// Tolerance on the sign tests for f' and (log f)''.
    pub sign_eps: f64,
    /// Flatness threshold for the non-locally-constant test.
    pub flat_eps: f64,
    /// Minimum flat run, as a fraction of the sampled span.
    pub flat_fraction: f64,
    pub bisect_tol: f64,
    pub endpoint: EndpointConfig,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            points: 1000,
            window: 20.0,
            sign_eps: 1e-12,
            flat_eps: 1e-10,
            flat_fraction: 1.0 / 50.0,
            bisect_tol: 1e-13,
            endpoint: EndpointConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointSummary {
    pub status: Integrability,
    pub value: Option<f64>,
}

impl EndpointSummary {
    pub fn finite(&self) -> bool {
        self.status == Integrability::Finite
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpClassification {
    pub label: String,
    pub domain: IntervalDomain,
    pub positive: bool,
    pub inf_f: f64,
    pub sup_f: f64,
    pub monotone: Monotonicity,
    pub log_convex: bool,
    pub non_locally_constant: bool,
    pub l1_at_a: EndpointSummary,
    pub l1_at_b: EndpointSummary,
    pub zeros_of_d1: Vec<f64>,
}

impl WarpClassification {
    pub fn is_constant(&self) -> bool {
        self.monotone == Monotonicity::Constant
    }
}

fn bisect_zero(f: &WarpingFunction, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f.eval3(lo)[1];
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f.eval3(mid)[1];
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sample `f` on cell midpoints of its (windowed) domain and test every
/// hypothesis the uniqueness theorems use.
pub fn classify_warping(f: &WarpingFunction, cfg: &SampleConfig) -> Result<WarpClassification> {
    let n = cfg.points.max(1000);
    let (lo, hi) = f.domain().window(cfg.window);
    let step = (hi - lo) / n as f64;
    let ts: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * step).collect();
    let vals: Vec<[f64; 4]> = ts.iter().map(|&t| f.eval4(t)).collect();
    if let Some(i) = vals.iter().position(|v| !(v[0] > 0.0) || !v[0].is_finite()) {
        return Err(Error::InvalidWarping(format!(
            "f({}) = {} is not positive",
            ts[i], vals[i][0]
        )));
    }
    let inf_f = vals.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
    let sup_f = vals.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
    let eps = cfg.sign_eps;
    let all_flat = vals.iter().all(|v| v[1].abs() <= eps);
    let non_neg = vals.iter().all(|v| v[1] >= -eps);
    let non_pos = vals.iter().all(|v| v[1] <= eps);
    let monotone = if all_flat {
        Monotonicity::Constant
    } else if non_neg {
        Monotonicity::NonDecreasing
    } else if non_pos {
        Monotonicity::NonIncreasing
    } else {
        Monotonicity::NonMonotone
    };
    let log_convex = vals.iter().all(|v| v[3] >= -eps);

    // longest run of consecutive samples with |f'| < flat_eps
    let min_run = cfg.flat_fraction * (hi - lo);
    let mut longest = 0.0f64;
    let mut run_start: Option<usize> = None;
    for (i, v) in vals.iter().enumerate() {
        if v[1].abs() < cfg.flat_eps {
            let s = *run_start.get_or_insert(i);
            longest = longest.max((i - s + 1) as f64 * step);
        } else {
            run_start = None;
        }
    }
    let non_locally_constant = longest < min_run;

    let mut zeros = Vec::new();
    for i in 0..n {
        let d = vals[i][1];
        if d == 0.0 {
            if !all_flat {
                zeros.push(ts[i]);
            }
            continue;
        }
        if i + 1 < n {
            let e = vals[i + 1][1];
            if e != 0.0 && (d < 0.0) != (e < 0.0) {
                zeros.push(bisect_zero(f, ts[i], ts[i + 1], cfg.bisect_tol));
            }
        }
    }

    let summarize = |side| -> Result<EndpointSummary> {
        let r = endpoint_integral(f, side, &cfg.endpoint)?;
        Ok(EndpointSummary {
            status: r.status,
            value: r.value,
        })
    };
    Ok(WarpClassification {
        label: f.label(),
        domain: f.domain(),
        positive: true,
        inf_f,
        sup_f,
        monotone,
        log_convex,
        non_locally_constant,
        l1_at_a: summarize(Side::A)?,
        l1_at_b: summarize(Side::B)?,
        zeros_of_d1: zeros,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn bundle_constant_and_cosh() {
        let b = WarpingFunction::constant().eval_bundle(0.0).unwrap();
        assert_eq!((b.f, b.d1, b.d2, b.log_d2), (1.0, 0.0, 0.0, 0.0));
        let b = WarpingFunction::cosh().eval_bundle(0.0).unwrap();
        assert_eq!((b.f, b.d1, b.d2, b.log_d2), (1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn bundle_counter_a_matches_symbolic_oracle() {
        // frozen from a sympy differentiation of √(1 + cosh⁴x)
        let f = WarpingFunction::preset(Preset::CounterA);
        let b = f.eval_bundle(0.0).unwrap();
        assert!((b.f - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.d1, 0.0);
        assert!((b.d2 - 2f64.sqrt()).abs() < 1e-15);
        assert!((b.log_d2 - 1.0).abs() < 1e-15);
        let cases = [
            (0.7, [1.8660225842160143, 1.6077674325389864, 4.190040801894261, 1.5030827388266561]),
            (-1.3, [4.011154797035045, -6.483346590677820, 13.805027433115164, 0.8291390502982768]),
            (2.5, [37.61826802599116, 74.17698821319460, 148.4708781485837, 0.05864582621268260]),
        ];
        for (t, want) in cases {
            let b = f.eval_bundle(t).unwrap();
            for (got, w) in [b.f, b.d1, b.d2, b.log_d2].into_iter().zip(want) {
                assert!(rel(got, w) < 1e-13, "t={t}: {got} vs {w}");
            }
        }
    }

    #[test]
    fn bundle_counter_b_matches_symbolic_oracle() {
        let f = WarpingFunction::preset(Preset::CounterB);
        let cases = [
            (0.0, [1.1180339887498948, 0.0, 0.22360679774997892, 0.2]),
            (0.7, [1.1653646938877826, 0.11594563577460915, 0.06747209897104789, 0.04799898220610977]),
            (-1.3, [1.2375124438921137, -0.11248560662919194, -0.052749468754651134, -0.050887586762381164]),
            (2.5, [1.3312656143326544, 0.0484932677853942, -0.037095074859127344, -0.029191403712257324]),
        ];
        for (t, want) in cases {
            let b = f.eval_bundle(t).unwrap();
            for (got, w) in [b.f, b.d1, b.d2, b.log_d2].into_iter().zip(want) {
                let ok = if w == 0.0 { got.abs() < 1e-15 } else { rel(got, w) < 1e-13 };
                assert!(ok, "t={t}: {got} vs {w}");
            }
        }
    }

    #[test]
    fn log_d2_consistent_with_derivatives() {
        for p in Preset::ALL {
            let f = WarpingFunction::preset(p);
            for t in [-2.0, -0.3, 0.4, 1.7] {
                let b = f.eval_bundle(t).unwrap();
                let direct = (b.d2 * b.f - b.d1 * b.d1) / (b.f * b.f);
                assert!((direct - b.log_d2).abs() < 1e-12 * (1.0 + direct.abs()), "{p} {t}");
            }
        }
    }

    #[test]
    fn presets_match_central_differences() {
        let h = 1e-4;
        for p in Preset::ALL {
            let f = WarpingFunction::preset(p);
            for t in [-1.9, -0.6, 0.25, 1.1, 2.3] {
                let [_, d1, d2] = f.eval3(t);
                let (fp, fm, f0) = (f.value(t + h), f.value(t - h), f.value(t));
                let fd1 = (fp - fm) / (2.0 * h);
                let fd2 = (fp - 2.0 * f0 + fm) / (h * h);
                let scale = f0.max(1.0);
                assert!((fd1 - d1).abs() <= 1e-6 * d1.abs().max(scale), "{p} d1 at {t}");
                assert!((fd2 - d2).abs() <= 1e-6 * d2.abs().max(scale), "{p} d2 at {t}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        let f = WarpingFunction::exp()
            .with_domain(IntervalDomain::new(f64::NEG_INFINITY, 0.0).unwrap())
            .unwrap();
        assert!(matches!(f.eval_bundle(0.0), Err(Error::Domain { .. })));
        assert!(matches!(f.eval_bundle(0.5), Err(Error::Domain { .. })));
        assert!(f.eval_bundle(-0.5).is_ok());
        assert!(IntervalDomain::new(1.0, 1.0).is_err());
    }

    #[test]
    fn endpoint_exp_towards_minus_infinity() {
        let f = WarpingFunction::exp()
            .with_domain(IntervalDomain::new(f64::NEG_INFINITY, 0.0).unwrap())
            .unwrap();
        let r = endpoint_integral(&f, Side::A, &EndpointConfig::default()).unwrap();
        assert_eq!(r.anchor, -1.0);
        assert!(r.finite());
        assert!((r.value.unwrap() - (-1f64).exp()).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn endpoint_constant_diverges() {
        let f = WarpingFunction::constant()
            .with_domain(IntervalDomain::new(0.0, f64::INFINITY).unwrap())
            .unwrap();
        let r = endpoint_integral(&f, Side::B, &EndpointConfig::default()).unwrap();
        assert_eq!(r.status, Integrability::Divergent);
        assert!(r.value.is_none());
    }

    #[test]
    fn endpoint_linear_to_finite_end() {
        let dom = IntervalDomain::new(0.0, 1.0).unwrap();
        let f = WarpingFunction::custom("1-t", dom, |t| [1.0 - t, -1.0, 0.0]);
        let r = endpoint_integral(&f, Side::B, &EndpointConfig::default()).unwrap();
        assert_eq!(r.anchor, 0.5);
        assert!(r.finite());
        assert!((r.value.unwrap() - 0.125).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn endpoint_singular_cases() {
        let dom = IntervalDomain::new(0.0, 1.0).unwrap();
        let inv_sqrt = WarpingFunction::custom("1/sqrt", dom, |t| {
            [1.0 / t.sqrt(), -0.5 * t.powf(-1.5), 0.75 * t.powf(-2.5)]
        });
        let r = endpoint_integral(&inv_sqrt, Side::A, &EndpointConfig::default()).unwrap();
        assert!(r.finite(), "{r:?}");
        assert!((r.value.unwrap() - 2f64.sqrt()).abs() < 1e-6);
        let inv = WarpingFunction::custom("1/t", dom, |t| [1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t)]);
        let r = endpoint_integral(&inv, Side::A, &EndpointConfig::default()).unwrap();
        assert_eq!(r.status, Integrability::Divergent, "{r:?}");
        let half_line = IntervalDomain::new(1.0, f64::INFINITY).unwrap();
        let inv_sq = WarpingFunction::custom("1/t^2", half_line, |t| {
            [1.0 / (t * t), -2.0 / (t * t * t), 6.0 / (t * t * t * t)]
        });
        let r = endpoint_integral(&inv_sq, Side::B, &EndpointConfig::default()).unwrap();
        assert!(r.finite(), "{r:?}");
        assert!((r.value.unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn classify_constant() {
        let c = classify_warping(&WarpingFunction::constant(), &SampleConfig::default()).unwrap();
        assert!(c.positive);
        assert_eq!(c.inf_f, 1.0);
        assert_eq!(c.monotone, Monotonicity::Constant);
        assert!(c.log_convex);
        assert!(!c.non_locally_constant);
        assert!(c.zeros_of_d1.is_empty());
    }

    #[test]
    fn classify_cosh() {
        let f = WarpingFunction::cosh()
            .with_domain(IntervalDomain::new(-3.0, 3.0).unwrap())
            .unwrap();
        let c = classify_warping(&f, &SampleConfig::default()).unwrap();
        assert!(c.log_convex);
        assert!(c.non_locally_constant);
        assert_eq!(c.monotone, Monotonicity::NonMonotone);
        assert_eq!(c.zeros_of_d1.len(), 1);
        assert!(c.zeros_of_d1[0].abs() < 1e-12);
        assert!(c.l1_at_a.finite() && c.l1_at_b.finite());
    }

    #[test]
    fn classify_counter_b_bounds() {
        let f = WarpingFunction::preset(Preset::CounterB)
            .with_domain(IntervalDomain::new(-20.0, 20.0).unwrap())
            .unwrap();
        let c = classify_warping(&f, &SampleConfig::default()).unwrap();
        assert!(c.inf_f >= 5f64.sqrt() / 2.0 - 1e-12);
        assert!(c.sup_f < 2f64.sqrt());
        assert_eq!(c.monotone, Monotonicity::NonMonotone);
    }

    #[test]
    fn classify_exp_half_line() {
        let f = WarpingFunction::exp()
            .with_domain(IntervalDomain::new(f64::NEG_INFINITY, 0.0).unwrap())
            .unwrap();
        let c = classify_warping(&f, &SampleConfig::default()).unwrap();
        assert_eq!(c.monotone, Monotonicity::NonDecreasing);
        assert!(c.log_convex);
        assert!(c.l1_at_a.finite());
        assert!(c.l1_at_b.finite());
    }

    #[test]
    fn classify_rejects_non_positive() {
        let dom = IntervalDomain::new(-1.0, 1.0).unwrap();
        let f = WarpingFunction::custom("t", dom, |t| [t, 1.0, 0.0]);
        assert!(matches!(
            classify_warping(&f, &SampleConfig::default()),
            Err(Error::InvalidWarping(_))
        ));
    }

    #[test]
    fn locally_constant_plateau_detected() {
        // smooth step: flat on (-3, -1), rises, flat again on (1, 3)
        let dom = IntervalDomain::new(-3.0, 3.0).unwrap();
        let f = WarpingFunction::custom("plateau", dom, |t| {
            if t.abs() >= 1.0 {
                [2.0 + t.signum(), 0.0, 0.0]
            } else {
                let s = std::f64::consts::FRAC_PI_2 * t;
                [2.0 + s.sin(), std::f64::consts::FRAC_PI_2 * s.cos(), -(std::f64::consts::FRAC_PI_2).powi(2) * s.sin()]
            }
        });
        let c = classify_warping(&f, &SampleConfig::default()).unwrap();
        assert!(!c.non_locally_constant);
        assert_eq!(c.monotone, Monotonicity::NonDecreasing);
    }

    #[test]
    fn tabulated_derivatives_are_consistent() {
        let n = 201;
        let ts: Vec<f64> = (0..n).map(|i| -2.0 + 4.0 * i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|t| t.cosh()).collect();
        let f = WarpingFunction::tabulated(CubicTable::new(ts.clone(), ys).unwrap());
        let h = ts[1] - ts[0];
        let mut worst1 = 0.0f64;
        let mut worst2 = 0.0f64;
        for i in 1..n - 1 {
            let [_, d1, d2] = f.eval3(ts[i]);
            let fd1 = (f.value(ts[i + 1]) - f.value(ts[i - 1])) / (2.0 * h);
            let fd2 = (f.value(ts[i + 1]) - 2.0 * f.value(ts[i]) + f.value(ts[i - 1])) / (h * h);
            worst1 = worst1.max((fd1 - d1).abs());
            worst2 = worst2.max((fd2 - d2).abs());
        }
        assert!(worst1 < 10.0 * h * h, "{worst1}");
        assert!(worst2 < 10.0 * h * h, "{worst2}");
        // against the analytic function too
        let [v, d1, d2] = f.eval3(0.3141);
        assert!((v - 0.3141f64.cosh()).abs() < 1e-7);
        assert!((d1 - 0.3141f64.sinh()).abs() < 1e-5);
        assert!((d2 - 0.3141f64.cosh()).abs() < 1e-3);
    }

    #[test]
    fn table_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let mut body = String::from("t,f\n");
        for i in 0..50 {
            let t = -1.0 + 2.0 * i as f64 / 49.0;
            body.push_str(&format!("{t},{}\n", 1.0 + t * t));
        }
        std::fs::write(&path, body).unwrap();
        let f = WarpingFunction::from_csv(&path).unwrap();
        assert_eq!(f.domain(), IntervalDomain::new(-1.0, 1.0).unwrap());
        assert!((f.value(0.5) - 1.25).abs() < 1e-10);
        std::fs::write(&path, "0,1\n1,-1\n2,1\n3,1\n").unwrap();
        assert!(WarpingFunction::from_csv(&path).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn log_convexity_is_scale_invariant(lambda in 1e-3f64..1e3, which in 0usize..5) {
                let f = WarpingFunction::preset(Preset::ALL[which]);
                let cfg = SampleConfig { window: 5.0, ..SampleConfig::default() };
                let c1 = classify_warping(&f, &cfg).unwrap();
                let c2 = classify_warping(&f.clone().scaled(lambda).unwrap(), &cfg).unwrap();
                prop_assert_eq!(c1.log_convex, c2.log_convex);
            }

            #[test]
            fn endpoint_classification_is_monotone(p in 1.2f64..4.0, lambda in 0.05f64..1.0, wiggle in 0.0f64..0.9) {
                // g = t^{-p} integrable at ∞, f = λ g (1 - wiggle·sin²t) ≤ g
                let dom = IntervalDomain::new(1.0, f64::INFINITY).unwrap();
                let g = WarpingFunction::custom("g", dom, move |t| [t.powf(-p), 0.0, 0.0]);
                let f = WarpingFunction::custom("f", dom, move |t| {
                    [lambda * t.powf(-p) * (1.0 - wiggle * t.sin().powi(2)), 0.0, 0.0]
                });
                let cfg = EndpointConfig::default();
                let rg = endpoint_integral(&g, Side::B, &cfg).unwrap();
                prop_assert!(rg.finite());
                let rf = endpoint_integral(&f, Side::B, &cfg).unwrap();
                prop_assert!(rf.finite(), "{:?}", rf);
            }
        }
    }
}
