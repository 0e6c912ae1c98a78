//! Sparse matrices and the two linear solvers used by Newton: restarted
//! GMRES (tori) and banded LU with partial pivoting (boxes).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Build from per-row `(column, value)` lists; duplicates are summed.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in r {
                if last == Some(c) {
                    *vals.last_mut().expect("entry") += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        (self.row_ptr[i]..self.row_ptr[i + 1])
            .find(|&k| self.cols[k] == j)
            .map_or(0.0, |k| self.vals[k])
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        let mut lo = 0;
        let mut hi = 0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                if j < i {
                    lo = lo.max(i - j);
                } else {
                    hi = hi.max(j - i);
                }
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmresConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            restart: 200,
            max_iter: 6000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Restarted GMRES with modified Gram–Schmidt, started from `x = 0`.
/// Starting from zero keeps the iterate inside the Krylov space of `b`,
/// which avoids exciting null modes of singular but consistent systems.
pub fn gmres(a: &Csr, b: &[f64], cfg: &GmresConfig) -> (Vec<f64>, LinearOutcome) {
    let n = a.n;
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    let target = (cfg.rel_tol * bnorm).max(cfg.abs_tol);
    if bnorm <= target {
        return (
            x,
            LinearOutcome {
                iterations: 0,
                residual: bnorm,
                converged: true,
            },
        );
    }
    let m = cfg.restart.max(1).min(n.max(1));
    let mut total = 0;
    let mut r = b.to_vec();
    let mut tmp = vec![0.0; n];
    loop {
        let beta = norm(&r);
        if beta <= target || total >= cfg.max_iter {
            return (
                x,
                LinearOutcome {
                    iterations: total,
                    residual: beta,
                    converged: beta <= target,
                },
            );
        }
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            a.mul(&v[k], &mut tmp);
            let mut w = tmp.clone();
            for (i, vi) in v.iter().enumerate().take(k + 1) {
                let hik: f64 = w.iter().zip(vi).map(|(a, b)| a * b).sum();
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].abs() <= target || total >= cfg.max_iter || wn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / wn).collect());
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vji) in x.iter_mut().zip(&v[j]) {
                *xi += yj * vji;
            }
        }
        a.mul(&x, &mut tmp);
        for i in 0..n {
            r[i] = b[i] - tmp[i];
        }
        if k_used == 0 {
            let beta = norm(&r);
            return (
                x,
                LinearOutcome {
                    iterations: total,
                    residual: beta,
                    converged: beta <= target,
                },
            );
        }
    }
}

/// Solve `A x = b` by banded Gaussian elimination with partial pivoting.
pub fn banded_solve(a: &Csr, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    let (kl, ku) = a.bandwidth();
    // row pivoting widens the upper band by kl
    let width = kl + ku + kl + 1;
    let off = kl + ku; // column j of row i lives at j - i + off
    let mut band = vec![0.0; n * width];
    for i in 0..n {
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[k];
            band[i * width + (j + off - i)] = a.vals[k];
        }
    }
    let mut x = b.to_vec();
    let scale = a.vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let last = (col + kl).min(n - 1);
        let mut piv = col;
        let mut best = band[col * width + off].abs();
        for r in col + 1..=last {
            let v = band[r * width + (col + off - r)].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= 1e-14 * scale {
            return Err(Error::LinearSolve(format!(
                "singular pivot {best:e} in column {col}"
            )));
        }
        let jmax = (col + ku + kl).min(n - 1);
        if piv != col {
            for j in col..=jmax {
                let a_idx = col * width + (j + off - col);
                let b_idx = piv * width + (j + off - piv);
                band.swap(a_idx, b_idx);
            }
            x.swap(col, piv);
        }
        let d = band[col * width + off];
        for r in col + 1..=last {
            let l = band[r * width + (col + off - r)] / d;
            if l == 0.0 {
                continue;
            }
            band[r * width + (col + off - r)] = 0.0;
            for j in col + 1..=jmax {
                band[r * width + (j + off - r)] -= l * band[col * width + (j + off - col)];
            }
            x[r] -= l * x[col];
        }
    }
    for i in (0..n).rev() {
        let jmax = (i + ku + kl).min(n - 1);
        let mut s = x[i];
        for j in i + 1..=jmax {
            s -= band[i * width + (j + off - i)] * x[j];
        }
        x[i] = s / band[i * width + off];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_banded(n: usize, bw: usize, seed: u64) -> Csr {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| {
                let mut r = Vec::new();
                for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                    let mut v: f64 = rng.gen_range(-1.0..1.0);
                    if i == j {
                        v += if rng.gen_bool(0.5) { 0.3 } else { -0.3 };
                    }
                    r.push((j, v));
                }
                r
            })
            .collect();
        Csr::from_rows(n, rows)
    }

    fn dense(a: &Csr) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(a.n, a.n);
        for i in 0..a.n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                m[(i, a.cols[k])] += a.vals[k];
            }
        }
        m
    }

    #[test]
    fn duplicates_are_summed() {
        let a = Csr::from_rows(2, vec![vec![(1, 1.0), (0, 2.0), (1, 3.0)], vec![(1, 1.0)]]);
        assert_eq!(a.get(0, 1), 4.0);
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.bandwidth(), (0, 1));
    }

    #[test]
    fn banded_matches_dense_lu() {
        for seed in 0..5 {
            let a = random_banded(40, 3, seed);
            let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
            let x = banded_solve(&a, &b).unwrap();
            let want = dense(&a).lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
            for i in 0..40 {
                assert!((x[i] - want[i]).abs() < 1e-9 * (1.0 + want[i].abs()));
            }
        }
    }

    #[test]
    fn gmres_solves_spd_and_nonsymmetric() {
        let n = 60;
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 4.0)];
                if i > 0 {
                    r.push((i - 1, -1.3));
                }
                if i + 1 < n {
                    r.push((i + 1, -0.7));
                }
                r
            })
            .collect();
        let a = Csr::from_rows(n, rows);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let cfg = GmresConfig {
            restart: 7,
            ..GmresConfig::default()
        };
        let (x, out) = gmres(&a, &b, &cfg);
        assert!(out.converged, "{out:?}");
        let mut ax = vec![0.0; n];
        a.mul(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-10);
        }
    }
}
