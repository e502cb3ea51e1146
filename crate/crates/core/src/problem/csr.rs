use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking the structural invariants.
    pub fn new(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != rows + 1 {
            return Err(Error::invalid(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                rows + 1
            )));
        }
        if row_ptr[0] != 0 || *row_ptr.last().unwrap() != col_idx.len() {
            return Err(Error::invalid("row_ptr must start at 0 and end at nnz"));
        }
        if col_idx.len() != vals.len() {
            return Err(Error::invalid("col_idx and vals differ in length"));
        }
        for r in 0..rows {
            let (s, e) = (row_ptr[r], row_ptr[r + 1]);
            if s > e {
                return Err(Error::invalid(format!("row_ptr decreases at row {r}")));
            }
            for p in s..e {
                if col_idx[p] >= cols {
                    return Err(Error::invalid(format!(
                        "column {} out of range in row {r}",
                        col_idx[p]
                    )));
                }
                if p > s && col_idx[p] <= col_idx[p - 1] {
                    return Err(Error::invalid(format!(
                        "column indices not strictly increasing in row {r}"
                    )));
                }
            }
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite matrix entry"));
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Builds from dense row-major data, dropping exact zeros.
    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid("dense data has wrong length"));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = data[r * cols + c];
                if v != 0.0 {
                    col_idx.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self::new(rows, cols, row_ptr, col_idx, vals)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[s..e], &self.vals[s..e])
    }

    #[inline]
    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (idx, vals) = self.row(r);
        idx.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
    }

    pub fn row_sq_norm(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v * v).sum()
    }

    /// Entry (r, c), found by binary search in row r.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, vals) = self.row(r);
        match idx.binary_search(&c) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|r| self.row_dot(r, x)).collect()
    }

    /// `y = Aᵀ w`
    pub fn tmul_vec(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let wr = w[r];
            if wr == 0.0 {
                continue;
            }
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                out[c] += wr * v;
            }
        }
        out
    }

    pub fn col_sq_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (&c, &v) in self.col_idx.iter().zip(&self.vals) {
            out[c] += v * v;
        }
        out
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            let (idx, v) = self.row(r);
            for (&c, &val) in idx.iter().zip(v) {
                let p = next[c];
                col_idx[p] = r;
                vals[p] = val;
                next[c] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Multiplies every entry of row r by `s`.
    pub(crate) fn scale_row(&mut self, r: usize, s: f64) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.vals[a..b].iter_mut().for_each(|v| *v *= s);
    }

    /// Multiplies column c by `s[c]` for every column.
    pub(crate) fn scale_cols(&mut self, s: &[f64]) {
        for (v, &c) in self.vals.iter_mut().zip(&self.col_idx) {
            *v *= s[c];
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                out[r * self.cols + c] = v;
            }
        }
        out
    }
}
