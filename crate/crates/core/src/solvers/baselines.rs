use crate::delay::DelaySchedule;
use crate::error::{Error, Result};
use crate::problem::{vr_grad, CompositeProblem, Snapshot};

use super::aasvrg::component_stream;
use super::history::History;
use super::trace::{Recorder, SolverOptions, Trace};

/// Step-size rule of the SGD baseline; η₀ is `SolverOptions::gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Constant,
    /// η₀ √(σ₀ / (t + σ₀))
    Decaying { sigma0: f64 },
}

impl StepRule {
    pub fn step(&self, eta0: f64, t: usize) -> f64 {
        match *self {
            StepRule::Constant => eta0,
            StepRule::Decaying { sigma0 } => eta0 * (sigma0 / (t as f64 + sigma0)).sqrt(),
        }
    }
}

/// Delayed proximal SVRG with inner length 2n, snapshot = mean of x₁ … x_m and
/// restart from the snapshot. `opts.iters` counts epochs.
pub fn run_asvrg_baseline(
    problem: &CompositeProblem,
    schedule: &DelaySchedule,
    opts: &SolverOptions,
) -> Result<Trace> {
    let mut x = opts.validate(problem)?;
    let n = problem.n_components();
    let m = 2 * n;
    let epochs = opts.iters;
    schedule.check_horizon(epochs * m)?;
    let dim = x.len();
    let mut snap = Snapshot::new(problem, x.clone());
    let mut delta = vec![0.0; dim];
    let mut sum = vec![0.0; dim];
    let comps = component_stream(opts.seed);
    let mut rec = Recorder::new(problem, opts);
    let weight = 1.0 / opts.gamma;
    for s in 0..epochs {
        if s > 0 {
            snap = Snapshot::new(problem, x.clone());
        }
        rec.grad_evals += n as u64;
        let mut hist: History<Vec<f64>> = History::new(schedule.tau() + 1);
        hist.push(x.clone());
        sum.iter_mut().for_each(|e| *e = 0.0);
        let start = s * m;
        for k in 0..m {
            let jl = schedule.j(start + k).saturating_sub(start);
            let i = comps.index((start + k) as u64, n);
            let g = vr_grad(problem, hist.get(jl), &snap, i)?;
            rec.grad_evals += 1;
            problem.nonsmooth().prox_full_into(&x, &g, weight, &mut delta);
            for e in 0..dim {
                x[e] += delta[e];
                sum[e] += x[e];
            }
            let mut slot = hist.recycle().unwrap_or_else(|| vec![0.0; dim]);
            slot.copy_from_slice(&x);
            hist.push(slot);
        }
        for e in 0..dim {
            x[e] = sum[e] / m as f64;
        }
        rec.push_iterate(&x);
        if rec.due(s + 1, epochs) {
            rec.record(s + 1, &x);
        }
    }
    Ok(rec.finish(x))
}

/// Delayed proximal stochastic gradient descent.
pub fn run_sgd_baseline(
    problem: &CompositeProblem,
    schedule: &DelaySchedule,
    rule: StepRule,
    opts: &SolverOptions,
) -> Result<Trace> {
    if let StepRule::Decaying { sigma0 } = rule {
        if !(sigma0 > 0.0) {
            return Err(Error::invalid("decaying step needs sigma0 > 0"));
        }
    }
    let mut x = opts.validate(problem)?;
    schedule.check_horizon(opts.iters)?;
    let dim = x.len();
    let n = problem.n_components();
    let smooth = problem.smooth();
    let mut g = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    let mut hist: History<Vec<f64>> = History::new(schedule.tau() + 1);
    hist.push(x.clone());
    let comps = component_stream(opts.seed);
    let mut rec = Recorder::new(problem, opts);
    let k_max = opts.iters;
    for k in 0..k_max {
        let i = comps.index(k as u64, n);
        let c = smooth.component_coeff(hist.get(schedule.j(k)), i);
        g.iter_mut().for_each(|e| *e = 0.0);
        smooth.add_row(i, c, &mut g);
        rec.grad_evals += 1;
        let eta = rule.step(opts.gamma, k);
        problem.nonsmooth().prox_full_into(&x, &g, 1.0 / eta, &mut delta);
        for e in 0..dim {
            x[e] += delta[e];
        }
        let mut slot = hist.recycle().unwrap_or_else(|| vec![0.0; dim]);
        slot.copy_from_slice(&x);
        hist.push(slot);
        rec.push_iterate(&x);
        if rec.due(k + 1, k_max) {
            rec.record(k + 1, &x);
        }
    }
    Ok(rec.finish(x))
}
