//! The change of variable `v = ψ(u)`, `ψ(t) = ∫_{u_ref}^t ds / f(s)`, which
//! turns the minimal-surface equation into the φ-Laplacian form
//!
//! `div(Dv / √(1 + |Dv|²)) − n f'(ψ⁻¹ v) / √(1 + |Dv|²) = 0`.
//!
//! In the continuum the transformed residual equals `f(u) · R(u)`.

use std::f64::consts::FRAC_PI_2;

use super::reduced::Profile;
use crate::error::{Error, Result};
use crate::fiber::ops::{check_grid, divergence_raw, grad_at};
use crate::fiber::{FiberGrid, ScalarField};
use crate::geometry::ginv;
use crate::quad::{integrate, QuadConfig};
use crate::warp::{Preset, WarpKind, WarpingFunction};

/// `φ(x) = x / √(1 + x²)`
#[inline]
pub fn phi_map(x: f64) -> f64 {
    x / (1.0 + x * x).sqrt()
}

/// Gudermannian `∫₀ᵗ sech`.
fn gd(t: f64) -> f64 {
    t.sinh().atan()
}

#[derive(Debug, Clone)]
pub struct Psi {
    f: WarpingFunction,
    u_ref: f64,
    quad: QuadConfig,
}

impl Psi {
    pub fn new(f: &WarpingFunction, u_ref: f64) -> Result<Self> {
        f.domain().check(u_ref)?;
        Ok(Self {
            f: f.clone(),
            u_ref,
            quad: QuadConfig::default(),
        })
    }

    pub fn u_ref(&self) -> f64 {
        self.u_ref
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.f
    }

    fn preset(&self) -> Option<Preset> {
        match self.f.kind() {
            WarpKind::Preset(p) => Some(*p),
            _ => None,
        }
    }

    /// `ψ(t)`
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.f.domain().check(t)?;
        let s = self.f.scale();
        let r = self.u_ref;
        Ok(match self.preset() {
            Some(Preset::Constant) => (t - r) / s,
            Some(Preset::Exp) => ((-r).exp() - (-t).exp()) / s,
            Some(Preset::Cosh) => (gd(t) - gd(r)) / s,
            _ => {
                let q = integrate(|x| 1.0 / self.f.value(x), r, t, &self.quad);
                if !q.converged && q.abs_error > 1e-11 * (1.0 + q.value.abs()) {
                    return Err(Error::Quadrature(format!("ψ({t}) did not converge")));
                }
                q.value
            }
        })
    }

    /// `ψ⁻¹(v)`; closed form for the constant, exponential and cosh
    /// presets, otherwise bracket expansion followed by safeguarded Newton.
    pub fn inverse(&self, v: f64) -> Result<f64> {
        let out_of_range = || Error::Inversion(format!("v = {v} is outside the range of ψ"));
        if !v.is_finite() {
            return Err(out_of_range());
        }
        let s = self.f.scale();
        let r = self.u_ref;
        let t = match self.preset() {
            Some(Preset::Constant) => r + s * v,
            Some(Preset::Exp) => {
                let arg = (-r).exp() - s * v;
                if !(arg > 0.0) {
                    return Err(out_of_range());
                }
                -arg.ln()
            }
            Some(Preset::Cosh) => {
                let y = gd(r) + s * v;
                if !(y.abs() < FRAC_PI_2) {
                    return Err(out_of_range());
                }
                y.tan().asinh()
            }
            _ => self.invert_numeric(v)?,
        };
        if !self.f.domain().contains(t) {
            return Err(out_of_range());
        }
        Ok(t)
    }

    fn invert_numeric(&self, v: f64) -> Result<f64> {
        let dom = self.f.domain();
        let out_of_range = || Error::Inversion(format!("v = {v} is outside the range of ψ"));
        let r = self.u_ref;
        if v == 0.0 {
            return Ok(r);
        }
        // ψ is increasing: walk away from u_ref until ψ crosses v
        let dir = v.signum();
        let end = if dir > 0.0 { dom.b } else { dom.a };
        let mut near = r;
        let mut step = 1.0;
        let far = loop {
            let mut t = r + dir * step;
            if (t - end) * dir >= 0.0 {
                // approach a finite end geometrically
                t = 0.5 * (near + end);
                if (t - near).abs() < 1e-14 * (1.0 + end.abs()) {
                    return Err(out_of_range());
                }
            }
            if (self.eval(t)? - v) * dir >= 0.0 {
                break t;
            }
            near = t;
            step = 2.0 * (t - r).abs();
            if step > 1e6 {
                return Err(out_of_range());
            }
        };
        let (lo, hi) = if dir > 0.0 { (near, far) } else { (far, near) };
        let (mut a, mut b) = (lo, hi);
        let mut t = 0.5 * (a + b);
        for _ in 0..200 {
            let g = self.eval(t)? - v;
            if g == 0.0 {
                return Ok(t);
            }
            if g < 0.0 {
                a = t;
            } else {
                b = t;
            }
            let newton = t - g * self.f.value(t);
            t = if newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if (b - a).abs() <= 4.0 * f64::EPSILON * (1.0 + t.abs()) || g.abs() < 1e-15 {
                return Ok(t);
            }
        }
        Ok(t)
    }
}

/// `v = ψ(u)` nodewise, with `u_ref` defaulting to `min u`.
pub fn transform_psi(
    f: &WarpingFunction,
    u: &ScalarField,
    u_ref: Option<f64>,
) -> Result<(ScalarField, Psi)> {
    let psi = Psi::new(f, u_ref.unwrap_or_else(|| u.min()))?;
    let vals = u
        .values()
        .iter()
        .map(|&t| psi.eval(t))
        .collect::<Result<Vec<_>>>()?;
    Ok((ScalarField::new(*u.grid(), vals)?, psi))
}

pub fn inverse_psi(psi: &Psi, v: &ScalarField) -> Result<ScalarField> {
    let vals = v
        .values()
        .iter()
        .map(|&x| psi.inverse(x))
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(*v.grid(), vals)
}

/// `div_h(Dv/√(1 + |Dv|²)) − n f'(ψ⁻¹ v)/√(1 + |Dv|²)` on the fiber grid.
pub fn transformed_residual(grid: &FiberGrid, psi: &Psi, v: &ScalarField) -> Result<ScalarField> {
    check_grid(grid, v.grid())?;
    let n = grid.dim();
    let gi = ginv(grid);
    let mut flux = vec![0.0; n * grid.len()];
    let mut source = vec![0.0; grid.len()];
    for p in 0..grid.len() {
        let dv = grad_at(grid, v.values(), p);
        let s = (1.0 + (0..n).map(|k| gi[k] * dv[k] * dv[k]).sum::<f64>()).sqrt();
        for k in 0..n {
            flux[p * n + k] = gi[k] * dv[k] / s;
        }
        let t = psi.inverse(v.values()[p])?;
        source[p] = n as f64 * psi.warping().eval3(t)[1] / s;
    }
    let div = divergence_raw(grid, &flux);
    ScalarField::new(*grid, div.iter().zip(source).map(|(d, s)| d - s).collect())
}

/// Transformed residual (`n = 2`) of `y ↦ (x, y, u(x))` over `dx² + φ² dy²`,
/// evaluated analytically from `v = ψ(u)`, `v' = u'/f`,
/// `v'' = u''/f − f' u'²/f²`, with `u` recovered as `ψ⁻¹(v)`.
pub fn reduced_transformed_residual(
    psi: &Psi,
    phi: &WarpingFunction,
    u: &Profile,
    x: f64,
) -> Result<f64> {
    let [t, d1, d2] = u.eval(x);
    let f = psi.warping();
    let [a, a1, _] = f.eval3(t);
    let v = psi.eval(t)?;
    let dv = d1 / a;
    let ddv = d2 / a - a1 * d1 * d1 / (a * a);
    let s = (1.0 + dv * dv).sqrt();
    let y = dv / s;
    let dy = ddv / (s * s * s);
    let [p, p1, _] = phi.eval3(x);
    let back = psi.inverse(v)?;
    Ok((p1 / p) * y + dy - 2.0 * f.eval3(back)[1] / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ms_residual;
    use crate::solver::reduced::{linspace, reduced_residual};
    use crate::warp::IntervalDomain;

    #[test]
    fn phi_map_shape() {
        let mut prev = f64::NEG_INFINITY;
        for x in linspace(-100.0, 100.0, 2001) {
            let y = phi_map(x);
            assert!(y.abs() < 1.0);
            assert!(y > prev);
            assert_eq!(phi_map(-x), -y);
            prev = y;
        }
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        let custom = |p: Preset| {
            let f = WarpingFunction::preset(p);
            WarpingFunction::custom("copy", f.domain(), move |t| f.eval3(t))
        };
        for p in [Preset::Constant, Preset::Exp, Preset::Cosh] {
            let a = Psi::new(&WarpingFunction::preset(p), -0.3).unwrap();
            let b = Psi::new(&custom(p), -0.3).unwrap();
            for t in linspace(-2.0, 2.0, 17) {
                assert!((a.eval(t).unwrap() - b.eval(t).unwrap()).abs() < 1e-12, "{p} {t}");
            }
        }
    }

    #[test]
    fn exp_round_trip() {
        let f = WarpingFunction::exp();
        let psi = Psi::new(&f, 0.2).unwrap();
        for t in linspace(-3.0, 3.0, 61) {
            let v = psi.eval(t).unwrap();
            assert!((v - ((-0.2f64).exp() - (-t).exp())).abs() < 1e-15);
            assert!((psi.inverse(v).unwrap() - t).abs() < 1e-10);
        }
        assert!(matches!(psi.inverse(1.0), Err(Error::Inversion(_))));
    }

    #[test]
    fn numeric_round_trip_and_range() {
        for p in [Preset::CounterA, Preset::CounterB] {
            let f = WarpingFunction::preset(p);
            let psi = Psi::new(&f, 0.1).unwrap();
            for t in linspace(-4.0, 4.0, 33) {
                let v = psi.eval(t).unwrap();
                assert!((psi.inverse(v).unwrap() - t).abs() < 1e-10, "{p} {t}");
            }
        }
        // ψ for counter-a is bounded, so large v is rejected
        let psi = Psi::new(&WarpingFunction::preset(Preset::CounterA), 0.0).unwrap();
        assert!(matches!(psi.inverse(10.0), Err(Error::Inversion(_))));
        // finite domain: range is bounded by the endpoints
        let f = WarpingFunction::constant()
            .with_domain(IntervalDomain::new(-1.0, 1.0).unwrap())
            .unwrap();
        let psi = Psi::new(&f, 0.0).unwrap();
        assert!(psi.inverse(1.5).is_err());
        let g = WarpingFunction::custom("one", IntervalDomain::new(-1.0, 1.0).unwrap(), |_| [1.0, 0.0, 0.0]);
        let psi = Psi::new(&g, 0.0).unwrap();
        assert!((psi.inverse(0.75).unwrap() - 0.75).abs() < 1e-12);
        assert!(psi.inverse(1.5).is_err());
    }

    #[test]
    fn product_transform_is_a_shift() {
        let g = FiberGrid::unit_torus(2, 8).unwrap();
        let u = ScalarField::random_smooth(g, 0.5, 2, 3);
        let (v, psi) = transform_psi(&WarpingFunction::constant(), &u, None).unwrap();
        assert_eq!(psi.u_ref(), u.min());
        for (a, b) in v.values().iter().zip(u.values()) {
            assert!((a - (b - u.min())).abs() < 1e-15);
        }
        let back = inverse_psi(&psi, &v).unwrap();
        for (a, b) in back.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn transformed_residual_is_f_times_residual_to_second_order() {
        let gap = |m: usize| {
            let g = FiberGrid::unit_torus(2, m).unwrap();
            let f = WarpingFunction::cosh();
            let u = ScalarField::from_fn(g, |x, y| {
                0.2 * (std::f64::consts::TAU * x).sin() + 0.1 * (std::f64::consts::TAU * y).cos()
            });
            let (v, psi) = transform_psi(&f, &u, None).unwrap();
            let t = transformed_residual(&g, &psi, &v).unwrap();
            let r = ms_residual(&g, &f, &u).unwrap();
            (0..g.len())
                .map(|p| (t.values()[p] - f.value(u.values()[p]) * r.values()[p]).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (gap(32), gap(64));
        assert!((e1 / e2).log2() > 1.8, "{e1} {e2}");
    }

    #[test]
    fn minimal_slices_have_zero_transformed_residual() {
        let g = FiberGrid::unit_torus(2, 8).unwrap();
        let u = ScalarField::constant(g, 0.0);
        let (v, psi) = transform_psi(&WarpingFunction::cosh(), &u, Some(-0.5)).unwrap();
        let t = transformed_residual(&g, &psi, &v).unwrap();
        assert!(t.max_abs() < 1e-15);
    }

    #[test]
    fn reduced_transform_matches_f_times_residual() {
        let phi = WarpingFunction::preset(Preset::CounterA);
        let one = WarpingFunction::constant();
        let psi = Psi::new(&one, -1.0).unwrap();
        for x in linspace(-5.0, 5.0, 101) {
            let t = reduced_transformed_residual(&psi, &phi, &Profile::tanh(), x).unwrap();
            assert!(t.abs() < 1e-12);
        }
        let f = WarpingFunction::cosh();
        let psi = Psi::new(&f, -1.0).unwrap();
        let u = Profile::tanh().scaled(0.5);
        for x in linspace(-3.0, 3.0, 31) {
            let t = reduced_transformed_residual(&psi, &phi, &u, x).unwrap();
            let r = reduced_residual(&f, &phi, &u, x);
            let a = f.value(u.eval(x)[0]);
            assert!((t - a * r).abs() < 1e-12, "{x}: {t} {}", a * r);
        }
    }
}
