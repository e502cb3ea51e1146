use crate::error::{Error, Result};
use crate::linalg;

use super::{CompositeProblem, Dataset, Loss, NonsmoothPart, SmoothPart};

/// Dual of the L2-regularized smoothed-hinge SVM, as a minimization over α:
///
/// D(α) = (1/(2λn²))‖Aᵀα‖² + (1/n) Σ (−y_i α_i + α_i²/2),  y_i α_i ∈ [0, 1].
///
/// The quadratic data term is f; the conjugate terms and box form h.
#[derive(Debug, Clone)]
pub struct DualSvmProblem {
    base: CompositeProblem,
    data: Dataset,
    lambda: f64,
    hinge: Loss,
}

pub fn make_dual_svm(data: &Dataset, lambda: f64) -> Result<DualSvmProblem> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("lambda {lambda} must be positive")));
    }
    let n = data.n_samples();
    if n == 0 {
        return Err(Error::Empty("dataset has no rows".into()));
    }
    if let Some(bad) = data.labels.iter().position(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::invalid(format!(
            "label {} at row {} is not +1 or -1",
            data.labels[bad], bad
        )));
    }
    let nf = n as f64;
    let smooth = SmoothPart::new(
        data.features.transpose(),
        vec![0.0; data.n_features()],
        Loss::Squared,
        1.0 / (lambda * nf * nf),
    )?;
    let (lo, hi): (Vec<f64>, Vec<f64>) = data
        .labels
        .iter()
        .map(|&y| if y > 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) })
        .unzip();
    let h = NonsmoothPart::QuadBox {
        linear: data.labels.iter().map(|y| -y / nf).collect(),
        quad: 1.0 / nf,
        lo,
        hi,
    };
    Ok(DualSvmProblem {
        base: CompositeProblem::new(smooth, h)?,
        data: data.clone(),
        lambda,
        hinge: Loss::smoothed_hinge(),
    })
}

impl DualSvmProblem {
    pub fn base(&self) -> &CompositeProblem {
        &self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn is_feasible(&self, alpha: &[f64]) -> bool {
        alpha.len() == self.base.dim() && self.base.nonsmooth().is_feasible(alpha)
    }

    /// x(α) = Aᵀα / (λn).
    pub fn primal_map(&self, alpha: &[f64]) -> Vec<f64> {
        let mut x = self.data.features.tmul_vec(alpha);
        linalg::scale(1.0 / (self.lambda * self.data.n_samples() as f64), &mut x);
        x
    }

    /// P(x) = (1/n) Σ φ(y_i A_i x) + (λ/2)‖x‖².
    pub fn primal_objective(&self, x: &[f64]) -> f64 {
        let m = self.data.features.mul_vec(x);
        let loss: f64 = m
            .iter()
            .zip(&self.data.labels)
            .map(|(&mi, &y)| self.hinge.value(mi, y))
            .sum();
        loss / self.data.n_samples() as f64 + 0.5 * self.lambda * linalg::norm_sq(x)
    }

    /// D(α) in minimization form; the dual value being maximized is −D(α).
    pub fn dual_objective(&self, alpha: &[f64]) -> f64 {
        self.base.objective(alpha)
    }

    /// P(x(α)) − (−D(α)) ≥ 0.
    pub fn duality_gap(&self, alpha: &[f64]) -> Result<f64> {
        if !self.is_feasible(alpha) {
            return Err(Error::invalid("dual point violates the box constraints"));
        }
        Ok(self.primal_objective(&self.primal_map(alpha)) + self.dual_objective(alpha))
    }
}
