//! Dataset and problem construction from settings.

use std::path::PathBuf;

use anyhow::{Context, Result};
use momcomp::problem::synth::{synthesize, SynthSpec, SynthTask};
use momcomp::problem::{load_libsvm, make_dual_svm, make_erm, CompositeProblem, Dataset, Loss, Regularizer};

use crate::exit::UsageError;
use crate::settings::Settings;

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_DENSITY: f64 = 0.1;

pub fn parse_loss(s: &str) -> Result<Loss> {
    match s {
        "squared" => Ok(Loss::Squared),
        "logistic" => Ok(Loss::Logistic),
        "hinge" => Ok(Loss::smoothed_hinge()),
        other => Err(UsageError::new(format!(
            "unknown loss {other:?} (expected squared, logistic or hinge)"
        ))
        .into()),
    }
}

fn task_for(loss: Loss) -> SynthTask {
    if loss == Loss::Squared {
        SynthTask::Regression
    } else {
        SynthTask::Classification
    }
}

pub fn parse_task(s: &str) -> Result<SynthTask> {
    match s {
        "regression" => Ok(SynthTask::Regression),
        "classification" => Ok(SynthTask::Classification),
        other => Err(UsageError::new(format!(
            "unknown task {other:?} (expected regression or classification)"
        ))
        .into()),
    }
}

/// Synthetic spec from `n`, `d`, `density`, `condition`, `data-seed`, `noise`.
pub fn synth_spec(s: &Settings, task: SynthTask) -> Result<SynthSpec> {
    let rows = s.get_or("n", DEFAULT_N)?;
    Ok(SynthSpec {
        rows,
        cols: s.get_or("d", rows)?,
        density: s.get_or("density", DEFAULT_DENSITY)?,
        condition: s.get("condition")?,
        seed: s.get_or("data-seed", 0)?,
        task,
        noise: s.get_or("noise", 0.1)?,
    })
}

pub fn load_dataset(s: &Settings, loss: Loss) -> Result<Dataset> {
    let mut data = match s.get::<PathBuf>("data")? {
        Some(path) => load_libsvm(&path, false)
            .with_context(|| format!("loading dataset {}", path.display()))?,
        None => synthesize(&synth_spec(s, task_for(loss))?)?.data,
    };
    if s.flag("normalize")? {
        data.normalize_rows();
    }
    Ok(data)
}

/// A problem together with what identifies it for caching.
pub struct Built {
    pub problem: CompositeProblem,
    pub data: Dataset,
    pub loss: Loss,
    pub lambda: f64,
    pub dual: bool,
}

/// `lambda` is a number or `auto` (1/(100n)); absent means `auto`.
pub fn lambda(s: &Settings, n: usize) -> Result<f64> {
    match s.raw("lambda") {
        None | Some("auto") => Ok(1.0 / (100.0 * n as f64)),
        Some(_) => {
            let l: f64 = s.get("lambda")?.expect("present");
            if !(l >= 0.0) || !l.is_finite() {
                return Err(UsageError::new(format!("lambda must be >= 0, got {l}")).into());
            }
            Ok(l)
        }
    }
}

pub fn build(s: &Settings) -> Result<Built> {
    let loss = parse_loss(s.raw("loss").unwrap_or("squared"))?;
    let dual = match s.raw("problem").unwrap_or("primal") {
        "primal" => false,
        "dual" => true,
        other => {
            return Err(UsageError::new(format!(
                "unknown problem {other:?} (expected primal or dual)"
            ))
            .into())
        }
    };
    if dual && !matches!(loss, Loss::SmoothedHinge { .. }) {
        return Err(UsageError::new("the dual problem is defined for the hinge loss only").into());
    }
    let data = load_dataset(s, loss)?;
    let lambda = lambda(s, data.n_samples())?;
    let problem = if dual {
        make_dual_svm(&data, lambda)?.base().clone()
    } else {
        let reg = if lambda > 0.0 {
            Regularizer::L2(lambda)
        } else {
            Regularizer::None
        };
        make_erm(&data, loss, reg)?
    };
    Ok(Built {
        problem,
        data,
        loss,
        lambda,
        dual,
    })
}
