use crate::error::{Error, Result};

use super::{CompositeProblem, Dataset, Loss, NonsmoothPart, SmoothPart};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    None,
    /// (λ/2)‖x‖², carried by h.
    L2(f64),
}

impl Regularizer {
    pub fn lambda(&self) -> f64 {
        match *self {
            Regularizer::None => 0.0,
            Regularizer::L2(l) => l,
        }
    }
}

/// P(x) = (1/n) Σ φ(A_i x; b_i) + (λ/2)‖x‖².
///
/// The data term is f; the ridge term becomes h with μ = λ.
pub fn make_erm(data: &Dataset, loss: Loss, reg: Regularizer) -> Result<CompositeProblem> {
    let lambda = reg.lambda();
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("regularization weight {lambda} must be >= 0")));
    }
    let n = data.n_samples();
    if n == 0 {
        return Err(Error::Empty("dataset has no rows".into()));
    }
    let smooth = SmoothPart::new(
        data.features.clone(),
        data.labels.clone(),
        loss,
        1.0 / n as f64,
    )?;
    let h = if lambda > 0.0 {
        NonsmoothPart::Ridge { mu: lambda }
    } else {
        NonsmoothPart::Zero
    };
    CompositeProblem::new(smooth, h)
}
