use crate::error::Result;
use crate::linalg;
use crate::problem::CompositeProblem;

/// Optimal value estimate with its optimality certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct FStar {
    pub value: f64,
    pub x: Vec<f64>,
    /// Proximal gradient-map norm at `x` with step 1/L.
    pub grad_map_norm: f64,
    pub iters: usize,
    pub converged: bool,
}

pub const FSTAR_TOL: f64 = 1e-12;
pub const FSTAR_MAX_ITERS: usize = 100_000;
const CHECK_EVERY: usize = 10;

/// Minimizes the problem by serial accelerated proximal gradient with step 1/L
/// and gradient-based adaptive restart, stopping once the gradient-map norm is
/// at most `tol` or after `max_iters` iterations.
pub fn compute_fstar(problem: &CompositeProblem, tol: f64, max_iters: usize) -> Result<FStar> {
    let dim = problem.dim();
    let gamma = 1.0 / problem.l();
    let h = problem.nonsmooth();
    let mut x = vec![0.0; dim];
    let mut x_prev = x.clone();
    let mut y = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    let mut t = 1.0f64;
    let mut norm = problem.grad_map_norm(&x, gamma);
    let mut iters = 0;
    while norm > tol && iters < max_iters {
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for e in 0..dim {
            y[e] = x[e] + beta * (x[e] - x_prev[e]);
        }
        let g = problem.full_grad(&y);
        h.prox_full_into(&y, &g, 1.0 / gamma, &mut delta);
        x_prev.copy_from_slice(&x);
        for e in 0..dim {
            x[e] = y[e] + delta[e];
        }
        // Restart when the step opposes the momentum direction.
        let mut dot = 0.0;
        for e in 0..dim {
            dot += -delta[e] * (x[e] - x_prev[e]);
        }
        t = if dot > 0.0 { 1.0 } else { t_next };
        iters += 1;
        if iters % CHECK_EVERY == 0 || iters == max_iters {
            norm = problem.grad_map_norm(&x, gamma);
        }
    }
    let value = problem.objective(&x);
    debug_assert!(linalg::all_finite(&x));
    Ok(FStar {
        value,
        grad_map_norm: norm,
        converged: norm <= tol,
        x,
        iters,
    })
}
