use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::{CsrMatrix, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthTask {
    /// y = A x* + noise
    Regression,
    /// y = sign(A x* + noise)
    Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    /// Probability that an entry is in the support.
    pub density: f64,
    /// Target λ_max/λ_min of AᵀA; `None` leaves the columns unscaled.
    pub condition: Option<f64>,
    pub seed: u64,
    pub task: SynthTask,
    pub noise: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            rows: 1000,
            cols: 100,
            density: 1.0,
            condition: None,
            seed: 0,
            task: SynthTask::Regression,
            noise: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub data: Dataset,
    /// Measured λ_max/λ_min of AᵀA, when a condition target was given.
    pub condition: Option<f64>,
}

/// Random sparse data with i.i.d. Bernoulli(density) supports.
///
/// Columns that come out empty receive one random entry so AᵀA stays
/// nonsingular. With a condition target, column j is scaled by
/// s^{-j/(d-1)} and s is bisected until the measured Gram condition is within
/// 1% of the target.
pub fn synthesize(spec: &SynthSpec) -> Result<SynthOutput> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::invalid("synthetic data needs rows > 0 and cols > 0"));
    }
    if !(spec.density > 0.0 && spec.density <= 1.0) {
        return Err(Error::invalid("density must lie in (0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); spec.rows];
    let mut col_hit = vec![false; spec.cols];
    for row in rows.iter_mut() {
        for (c, hit) in col_hit.iter_mut().enumerate() {
            if spec.density >= 1.0 || rng.random::<f64>() < spec.density {
                row.push((c, rng.sample::<f64, _>(StandardNormal)));
                *hit = true;
            }
        }
    }
    for (c, _) in col_hit.iter().enumerate().filter(|(_, h)| !**h) {
        let r = rng.random_range(0..spec.rows);
        rows[r].push((c, rng.sample::<f64, _>(StandardNormal)));
        rows[r].sort_by_key(|e| e.0);
    }
    let mut a = csr_from_rows(spec.cols, &rows)?;

    let mut measured = None;
    if let Some(target) = spec.condition {
        if !(target >= 1.0) {
            return Err(Error::invalid("condition target must be >= 1"));
        }
        let gram = gram(&a);
        let (scales, kappa) = fit_condition(&gram, target)?;
        a.scale_cols(&scales);
        measured = Some(kappa);
    }

    let x_star: Vec<f64> = (0..spec.cols)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let clean = a.mul_vec(&x_star);
    let labels = clean
        .iter()
        .map(|&m| {
            let y = m + spec.noise * rng.sample::<f64, _>(StandardNormal);
            match spec.task {
                SynthTask::Regression => y,
                SynthTask::Classification => {
                    if y >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            }
        })
        .collect();
    Ok(SynthOutput {
        data: Dataset::new(a, labels)?,
        condition: measured,
    })
}

fn csr_from_rows(cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<CsrMatrix> {
    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in rows {
        for &(c, v) in row {
            col_idx.push(c);
            vals.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    CsrMatrix::new(rows.len(), cols, row_ptr, col_idx, vals)
}

fn gram(a: &CsrMatrix) -> DMatrix<f64> {
    let d = a.cols();
    let mut g = DMatrix::<f64>::zeros(d, d);
    for r in 0..a.rows() {
        let (idx, vals) = a.row(r);
        for (p, (&i, &vi)) in idx.iter().zip(vals).enumerate() {
            for (&j, &vj) in idx[p..].iter().zip(&vals[p..]) {
                g[(i, j)] += vi * vj;
            }
        }
    }
    g.fill_lower_triangle_with_upper_triangle();
    g
}

fn geometric_scales(d: usize, log_s: f64) -> Vec<f64> {
    if d == 1 {
        return vec![1.0];
    }
    (0..d)
        .map(|j| (-log_s * j as f64 / (d - 1) as f64).exp())
        .collect()
}

/// λ_max / λ_min of a symmetric positive-definite matrix.
pub fn condition_number(g: &DMatrix<f64>) -> Result<f64> {
    let d = g.nrows();
    let chol = Cholesky::new(g.clone())
        .ok_or_else(|| Error::invalid("Gram matrix is singular or indefinite"))?;
    let start = DVector::from_fn(d, |i, _| 1.0 + 0.1 * ((i as f64) * 0.7).sin());
    let lmax = power(|v| g * v, start.clone());
    let inv = power(|v| chol.solve(v), start);
    Ok(lmax * inv)
}

fn power(op: impl Fn(&DVector<f64>) -> DVector<f64>, mut v: DVector<f64>) -> f64 {
    v /= v.norm();
    let mut rq = 0.0;
    for _ in 0..1000 {
        let w = op(&v);
        let next = v.dot(&w);
        let nw = w.norm();
        v = w / nw;
        if (next - rq).abs() <= 1e-10 * next.abs() {
            return next;
        }
        rq = next;
    }
    rq
}

fn fit_condition(g: &DMatrix<f64>, target: f64) -> Result<(Vec<f64>, f64)> {
    let d = g.nrows();
    let measure = |log_s: f64| -> Result<(Vec<f64>, f64)> {
        let s = geometric_scales(d, log_s);
        let sg = DMatrix::from_fn(d, d, |i, j| s[i] * g[(i, j)] * s[j]);
        Ok((s, condition_number(&sg)?))
    };
    let (s0, k0) = measure(0.0)?;
    if k0 >= target || d == 1 {
        if k0 > 1.1 * target {
            log::warn!("unscaled condition {k0:.3e} already exceeds target {target:.3e}");
        }
        return Ok((s0, k0));
    }
    // Condition grows like s² in the scaling exponent.
    let (mut lo, mut hi) = (0.0, 0.5 * (target / k0).ln() + 1.0);
    while measure(hi)?.1 < target {
        hi *= 2.0;
    }
    let mut best = (s0, k0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let (s, k) = measure(mid)?;
        let done = (k / target - 1.0).abs() <= 0.01;
        best = (s, k);
        if done {
            break;
        }
        if k < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Measured λ_max/λ_min of AᵀA for a dataset.
pub fn gram_condition(data: &Dataset) -> Result<f64> {
    condition_number(&gram(&data.features))
}
