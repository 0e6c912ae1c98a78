use std::path::Path;

use crate::error::Result;
use crate::fiber::ops::{check_grid, grad_at, hessian_at};
use crate::fiber::{check_range, FiberGrid, ScalarField};
use crate::warp::WarpingFunction;

/// Per-node extrinsic geometry of the graph `Σ_u`, immutable once built.
#[derive(Debug, Clone)]
pub struct GraphState {
    grid: FiberGrid,
    f: WarpingFunction,
    u: ScalarField,
    /// Coordinate gradient `∂ᵢu`.
    pub du: Vec<[f64; 2]>,
    /// Coordinate Hessian of `u`.
    pub hessian: Vec<[[f64; 2]; 2]>,
    /// `[f, f', f'', (log f)'']` at `u`.
    pub bundle: Vec<[f64; 4]>,
    /// `|Du|²_g`
    pub grad_sq: Vec<f64>,
    pub w: Vec<f64>,
    pub cos_theta: Vec<f64>,
    /// `∂_t` component of the unit normal.
    pub normal_t: Vec<f64>,
    /// Fiber component `−cos θ · g⁻¹Du / f²`.
    pub normal_m: Vec<[f64; 2]>,
    /// Shape operator in the chart basis: column `j` is `A ∂ⱼ`.
    pub shape: Vec<[[f64; 2]; 2]>,
    pub mean_curvature: Vec<f64>,
}

/// Shape operator of a graph at one point from `f`-values, the gradient `p`
/// and Hessian `hs` of `u`, with fiber metric inverse `ginv`:
///
/// `A X = −(f'/W)X − f' g(Du,X) Du/W³ + D_X Du/(fW) − g(D_X Du, Du) Du/(fW³)`.
pub fn shape_operator(
    n: usize,
    ginv: [f64; 2],
    fb: [f64; 3],
    p: [f64; 2],
    hs: [[f64; 2]; 2],
) -> [[f64; 2]; 2] {
    let [a, a1, _] = fb;
    let v = [ginv[0] * p[0], ginv[1] * p[1]];
    let gsq: f64 = (0..n).map(|k| v[k] * p[k]).sum();
    let w = (a * a + gsq).sqrt();
    let w3 = w * w * w;
    let mut hv = [0.0; 2];
    for j in 0..n {
        hv[j] = (0..n).map(|k| hs[j][k] * v[k]).sum();
    }
    let mut m = [[0.0; 2]; 2];
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            m[i][j] = -(a1 / w) * id - (a1 / w3) * v[i] * p[j] + ginv[i] * hs[i][j] / (a * w)
                - v[i] * hv[j] / (a * w3);
        }
    }
    m
}

impl GraphState {
    pub fn grid(&self) -> &FiberGrid {
        &self.grid
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.f
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn field(&self, v: &[f64]) -> ScalarField {
        ScalarField::new(self.grid, v.to_vec()).expect("node count")
    }

    pub fn w_field(&self) -> ScalarField {
        self.field(&self.w)
    }

    pub fn cos_theta_field(&self) -> ScalarField {
        self.field(&self.cos_theta)
    }

    pub fn mean_curvature_field(&self) -> ScalarField {
        self.field(&self.mean_curvature)
    }

    pub fn max_abs_mean_curvature(&self) -> f64 {
        self.mean_curvature.iter().fold(0.0, |m, h| m.max(h.abs()))
    }

    pub fn trace_shape(&self, node: usize) -> f64 {
        (0..self.dim()).map(|i| self.shape[node][i][i]).sum()
    }

    /// `tr(A²)`
    pub fn shape_sq_trace(&self, node: usize) -> f64 {
        let a = &self.shape[node];
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i][j] * a[j][i];
            }
        }
        s
    }

    /// `sin²θ = |∇τ|²` on the graph.
    pub fn sin_sq(&self, node: usize) -> f64 {
        self.grad_sq[node] / (self.w[node] * self.w[node])
    }

    /// Plot-ready CSV: index, coordinates, u, W, cos θ, H.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        let two = self.dim() == 2;
        let mut head = vec!["index", "x"];
        if two {
            head.push("y");
        }
        head.extend(["u", "W", "cos_theta", "H"]);
        wtr.write_record(&head)?;
        for p in 0..self.grid.len() {
            let [x, y] = self.grid.coord(p);
            let mut rec = vec![p.to_string(), format!("{x:?}")];
            if two {
                rec.push(format!("{y:?}"));
            }
            for v in [
                self.u.values()[p],
                self.w[p],
                self.cos_theta[p],
                self.mean_curvature[p],
            ] {
                rec.push(format!("{v:?}"));
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Build the graph geometry of `u` over `grid` in `I ×_f M`.
pub fn assemble_state(grid: &FiberGrid, f: &WarpingFunction, u: &ScalarField) -> Result<GraphState> {
    check_grid(grid, u.grid())?;
    check_range(u, f)?;
    let n = grid.dim();
    let ginv = [1.0 / grid.metric_entry(0), 1.0 / grid.metric_entry(1)];
    let len = grid.len();
    let mut st = GraphState {
        grid: *grid,
        f: f.clone(),
        u: u.clone(),
        du: Vec::with_capacity(len),
        hessian: Vec::with_capacity(len),
        bundle: Vec::with_capacity(len),
        grad_sq: Vec::with_capacity(len),
        w: Vec::with_capacity(len),
        cos_theta: Vec::with_capacity(len),
        normal_t: Vec::with_capacity(len),
        normal_m: Vec::with_capacity(len),
        shape: Vec::with_capacity(len),
        mean_curvature: Vec::with_capacity(len),
    };
    for p in 0..len {
        let du = grad_at(grid, u.values(), p);
        let hs = hessian_at(grid, u.values(), p);
        let b = f.eval4(u.values()[p]);
        let a = b[0];
        let gsq: f64 = (0..n).map(|k| ginv[k] * du[k] * du[k]).sum();
        let w = (a * a + gsq).sqrt();
        let c = a / w;
        let a_mat = shape_operator(n, ginv, [b[0], b[1], b[2]], du, hs);
        let tr: f64 = (0..n).map(|i| a_mat[i][i]).sum();
        st.du.push(du);
        st.hessian.push(hs);
        st.bundle.push(b);
        st.grad_sq.push(gsq);
        st.w.push(w);
        st.cos_theta.push(c);
        st.normal_t.push(c);
        st.normal_m.push([
            -c * ginv[0] * du[0] / (a * a),
            -c * ginv[1] * du[1] / (a * a),
        ]);
        st.shape.push(a_mat);
        st.mean_curvature.push(tr / n as f64);
    }
    Ok(st)
}
