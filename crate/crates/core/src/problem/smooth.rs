use crate::error::{Error, Result};

use super::{CsrMatrix, Loss};

/// Smooth part of a composite objective with generalized-linear structure:
///
/// f(x) = scale · Σ_r φ((M x)_r ; t_r)
///
/// Each row r of M is one component. Components are normalized so that
/// f = (1/n) Σ_r f_r with f_r = n · scale · φ(M_r x; t_r).
#[derive(Debug, Clone)]
pub struct SmoothPart {
    mat: CsrMatrix,
    /// Transpose of `mat`; row j of it is column j of `mat`.
    mat_t: CsrMatrix,
    targets: Vec<f64>,
    loss: Loss,
    scale: f64,
}

impl SmoothPart {
    pub fn new(mat: CsrMatrix, targets: Vec<f64>, loss: Loss, scale: f64) -> Result<Self> {
        if targets.len() != mat.rows() {
            return Err(Error::invalid("one target per matrix row required"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("scale must be positive and finite"));
        }
        if mat.cols() == 0 || mat.rows() == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        let mat_t = mat.transpose();
        Ok(Self {
            mat,
            mat_t,
            targets,
            loss,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.cols()
    }

    pub fn n_components(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.mat
    }

    /// Column access: row j of the returned matrix is column j of M.
    pub fn matrix_t(&self) -> &CsrMatrix {
        &self.mat_t
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_quadratic(&self) -> bool {
        self.loss.is_quadratic()
    }

    /// Multiplier turning `scale` into the per-component weight.
    #[inline]
    fn component_weight(&self) -> f64 {
        self.n_components() as f64 * self.scale
    }

    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        self.mat.mul_vec(x)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value_from_margins(&self.margins(x))
    }

    pub fn value_from_margins(&self, m: &[f64]) -> f64 {
        let s: f64 = m
            .iter()
            .zip(&self.targets)
            .map(|(&mi, &t)| self.loss.value(mi, t))
            .sum();
        self.scale * s
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.grad_from_margins(&self.margins(x))
    }

    pub fn grad_from_margins(&self, m: &[f64]) -> Vec<f64> {
        let w: Vec<f64> = m
            .iter()
            .zip(&self.targets)
            .map(|(&mi, &t)| self.scale * self.loss.deriv(mi, t))
            .collect();
        self.mat.tmul_vec(&w)
    }

    /// ∇_j f(x), touching only the rows that have a nonzero in column j.
    pub fn coord_grad(&self, x: &[f64], j: usize) -> f64 {
        self.coord_grad_with(j, |r| self.mat.row_dot(r, x))
    }

    /// ∇_j f given a callback that returns the margin of row r.
    #[inline]
    pub fn coord_grad_with(&self, j: usize, mut margin: impl FnMut(usize) -> f64) -> f64 {
        let (rows, vals) = self.mat_t.row(j);
        let mut g = 0.0;
        for (&r, &v) in rows.iter().zip(vals) {
            g += v * self.loss.deriv(margin(r), self.targets[r]);
        }
        self.scale * g
    }

    /// Scalar c with ∇f_i(x) = c · M_i.
    #[inline]
    pub fn component_coeff(&self, x: &[f64], i: usize) -> f64 {
        let m = self.mat.row_dot(i, x);
        self.component_weight() * self.loss.deriv(m, self.targets[i])
    }

    pub fn component_grad(&self, x: &[f64], i: usize) -> Result<Vec<f64>> {
        self.check_component(i)?;
        let c = self.component_coeff(x, i);
        let mut out = vec![0.0; self.dim()];
        self.add_row(i, c, &mut out);
        Ok(out)
    }

    /// `out += c · M_i`
    #[inline]
    pub fn add_row(&self, i: usize, c: f64, out: &mut [f64]) {
        if c == 0.0 {
            return;
        }
        let (idx, vals) = self.mat.row(i);
        for (&col, &v) in idx.iter().zip(vals) {
            out[col] += c * v;
        }
    }

    /// Scalar c with H_i(x) v = c · M_i, computed in O(nnz(M_i)).
    #[inline]
    pub fn hvp_coeff(&self, x: &[f64], v: &[f64], i: usize) -> f64 {
        let m = self.mat.row_dot(i, x);
        let mv = self.mat.row_dot(i, v);
        self.component_weight() * self.loss.second(m, self.targets[i]) * mv
    }

    /// H_i(x) · v = w φ''(M_i x) M_i (M_iᵀ v).
    pub fn hessian_vec(&self, x: &[f64], v: &[f64], i: usize) -> Result<Vec<f64>> {
        self.check_component(i)?;
        let c = self.hvp_coeff(x, v, i);
        let mut out = vec![0.0; self.dim()];
        self.add_row(i, c, &mut out);
        Ok(out)
    }

    /// Linear part of ∇f for quadratic losses: ∇f(u + d·v) = ∇f(u) + d · `linear_grad(v)`.
    pub fn linear_grad(&self, v: &[f64]) -> Result<Vec<f64>> {
        if !self.is_quadratic() {
            return Err(Error::Unsupported(format!(
                "gradient split needs a quadratic smooth part, loss is {}",
                self.loss.name()
            )));
        }
        let mut mv = self.mat.mul_vec(v);
        mv.iter_mut().for_each(|x| *x *= self.scale);
        Ok(self.mat.tmul_vec(&mv))
    }

    pub fn check_component(&self, i: usize) -> Result<()> {
        if i >= self.n_components() {
            Err(Error::OutOfRange {
                index: i,
                len: self.n_components(),
            })
        } else {
            Ok(())
        }
    }

    /// Per-row curvature bounds scaled into f: c_r = scale · sup φ''.
    pub(crate) fn row_curvatures(&self) -> Vec<f64> {
        self.targets
            .iter()
            .map(|&t| self.scale * self.loss.curvature_bound(t))
            .collect()
    }
}
