use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

use super::{NonsmoothPart, SmoothPart};

/// Smoothness and strong-convexity constants of a composite problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    /// Lipschitz constant of ∇f.
    pub l: f64,
    /// Per-coordinate Lipschitz constants of ∇f.
    pub l_coord: Vec<f64>,
    /// max over `l_coord`.
    pub l_c: f64,
    /// Largest smoothness constant among the components f_i.
    pub l_comp: f64,
    /// Strong-convexity modulus of h.
    pub mu: f64,
}

const POWER_MAX_ITERS: usize = 200;
const POWER_REL_TOL: f64 = 1e-6;
const COORD_FLOOR: f64 = 1e-12;

/// Largest eigenvalue of Mᵀ diag(c) M by power iteration, capped by the trace.
fn weighted_gram_lmax(smooth: &SmoothPart, c: &[f64]) -> f64 {
    let mat = smooth.matrix();
    let trace: f64 = (0..mat.rows()).map(|r| c[r] * mat.row_sq_norm(r)).sum();
    let dim = mat.cols();
    if dim == 1 || trace == 0.0 {
        return trace;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..1.5)).collect();
    let nv = linalg::norm(&v);
    linalg::scale(1.0 / nv, &mut v);
    let mut rq = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let mut mv = mat.mul_vec(&v);
        for (x, &cr) in mv.iter_mut().zip(c) {
            *x *= cr;
        }
        let w = mat.tmul_vec(&mv);
        let next = linalg::dot(&v, &w);
        let nw = linalg::norm(&w);
        if nw == 0.0 {
            break;
        }
        v = w;
        linalg::scale(1.0 / nw, &mut v);
        let done = (next - rq).abs() <= POWER_REL_TOL * next.abs();
        rq = next;
        if done {
            break;
        }
    }
    // Rayleigh quotients approach λ_max from below; pad by the tolerance.
    (rq * (1.0 + POWER_REL_TOL)).min(trace)
}

/// Closed-form and power-iteration constants for f and h.
pub fn estimate_constants(smooth: &SmoothPart, h: &NonsmoothPart) -> Constants {
    let c = smooth.row_curvatures();
    let l = weighted_gram_lmax(smooth, &c);

    let mat = smooth.matrix();
    let mut l_coord = vec![0.0; mat.cols()];
    for r in 0..mat.rows() {
        let (idx, vals) = mat.row(r);
        for (&j, &v) in idx.iter().zip(vals) {
            l_coord[j] += c[r] * v * v;
        }
    }
    let floor = COORD_FLOOR * l.max(f64::MIN_POSITIVE);
    for lj in &mut l_coord {
        *lj = lj.max(floor);
    }
    let l_c = l_coord.iter().cloned().fold(0.0, f64::max);
    let n = smooth.n_components() as f64;
    let l_comp = (0..mat.rows())
        .map(|r| n * c[r] * mat.row_sq_norm(r))
        .fold(0.0, f64::max);
    Constants {
        l: l.max(floor),
        l_coord,
        l_c,
        l_comp: l_comp.max(floor),
        mu: h.mu(),
    }
}

/// F(x) = f(x) + h(x) with cached constants.
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    smooth: SmoothPart,
    nonsmooth: NonsmoothPart,
    constants: Constants,
}

impl CompositeProblem {
    pub fn new(smooth: SmoothPart, nonsmooth: NonsmoothPart) -> Result<Self> {
        nonsmooth.validate(smooth.dim())?;
        let constants = estimate_constants(&smooth, &nonsmooth);
        Self::with_constants(smooth, nonsmooth, constants)
    }

    /// Builds a problem with caller-supplied constants.
    pub fn with_constants(
        smooth: SmoothPart,
        nonsmooth: NonsmoothPart,
        constants: Constants,
    ) -> Result<Self> {
        let c = &constants;
        let finite = [c.l, c.l_c, c.l_comp, c.mu].iter().all(|v| v.is_finite());
        if !finite || c.l <= 0.0 || c.l_c <= 0.0 || c.l_coord.len() != smooth.dim() {
            return Err(Error::invalid("smoothness constants must be finite and positive"));
        }
        if c.mu > c.l {
            return Err(Error::Hypothesis(format!(
                "strong convexity modulus {} exceeds smoothness constant {}",
                c.mu, c.l
            )));
        }
        Ok(Self {
            smooth,
            nonsmooth,
            constants,
        })
    }

    pub fn smooth(&self) -> &SmoothPart {
        &self.smooth
    }

    pub fn nonsmooth(&self) -> &NonsmoothPart {
        &self.nonsmooth
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn n_components(&self) -> usize {
        self.smooth.n_components()
    }

    pub fn l(&self) -> f64 {
        self.constants.l
    }

    pub fn l_c(&self) -> f64 {
        self.constants.l_c
    }

    pub fn mu(&self) -> f64 {
        self.constants.mu
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.smooth.value(x) + self.nonsmooth.value(x)
    }

    pub fn full_grad(&self, x: &[f64]) -> Vec<f64> {
        self.smooth.grad(x)
    }

    pub fn coord_grad(&self, x: &[f64], j: usize) -> Result<f64> {
        if j >= self.dim() {
            return Err(Error::OutOfRange {
                index: j,
                len: self.dim(),
            });
        }
        Ok(self.smooth.coord_grad(x, j))
    }

    pub fn component_grad(&self, x: &[f64], i: usize) -> Result<Vec<f64>> {
        self.smooth.component_grad(x, i)
    }

    pub fn hessian_vec(&self, x: &[f64], v: &[f64], i: usize) -> Result<Vec<f64>> {
        self.smooth.hessian_vec(x, v, i)
    }

    /// Norm of the proximal gradient map (x − prox_{t h}(x − t∇f(x))) / t.
    pub fn grad_map_norm(&self, x: &[f64], t: f64) -> f64 {
        let g = self.full_grad(x);
        let mut d = vec![0.0; x.len()];
        self.nonsmooth.prox_full_into(x, &g, 1.0 / t, &mut d);
        linalg::norm(&d) / t
    }
}

/// Epoch anchor of a variance-reduced gradient: x̃ with ∇f(x̃) and its margins.
#[derive(Debug, Clone)]
pub struct Snapshot {
    point: Vec<f64>,
    full_grad: Vec<f64>,
    margins: Vec<f64>,
}

impl Snapshot {
    pub fn new(problem: &CompositeProblem, x: Vec<f64>) -> Self {
        let margins = problem.smooth.margins(&x);
        let full_grad = problem.smooth.grad_from_margins(&margins);
        Self {
            point: x,
            full_grad,
            margins,
        }
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn full_grad(&self) -> &[f64] {
        &self.full_grad
    }

    /// Scalar c with ∇f_i(x̃) = c · M_i.
    #[inline]
    pub fn component_coeff(&self, smooth: &SmoothPart, i: usize) -> f64 {
        smooth.n_components() as f64
            * smooth.scale()
            * smooth.loss().deriv(self.margins[i], smooth.targets()[i])
    }
}

/// ∇f_i(w) − ∇f_i(x̃) + ∇f(x̃).
pub fn vr_grad(
    problem: &CompositeProblem,
    w: &[f64],
    snapshot: &Snapshot,
    i: usize,
) -> Result<Vec<f64>> {
    problem.smooth.check_component(i)?;
    let mut out = snapshot.full_grad.clone();
    let c = problem.smooth.component_coeff(w, i) - snapshot.component_coeff(&problem.smooth, i);
    problem.smooth.add_row(i, c, &mut out);
    Ok(out)
}
