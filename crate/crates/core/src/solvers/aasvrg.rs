use crate::delay::{CounterStream, DelaySchedule, StreamTag};
use crate::error::{Error, Result};
use crate::linalg;
use crate::momentum::{comp_sum_aasvrg, Regime, ThetaSchedule};
use crate::problem::{vr_grad, CompositeProblem, Snapshot};

use super::history::History;
use super::trace::{Recorder, SolverOptions, Trace};

/// How the delayed component gradient at w is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradMode {
    /// ∇f_i(w) at the compensated point.
    #[default]
    Exact,
    /// First-order expansion around the maximally compensated point p,
    /// which needs no knowledge of the actual delay.
    Hvp,
}

/// Weights of the strongly convex snapshot average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScWeights {
    /// θ₃ᵏ with θ₃ = 1 + μγ/θ₁.
    #[default]
    Theta3,
    /// (1 + θ₁)ᵏ.
    OnePlusTheta1,
}

/// Snapshot averaging rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnapshotRule {
    Uniform,
    /// Weight ratioᵏ on the k-th inner iterate.
    Geometric(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AasvrgOptions {
    pub grad_mode: GradMode,
    pub sc_weights: ScWeights,
    /// Inner-loop length m; n when absent.
    pub inner: Option<usize>,
}

/// Stream of sampled components shared by the variance-reduced methods.
pub fn component_stream(seed: u64) -> CounterStream {
    CounterStream::new(seed, StreamTag::Component)
}

/// Weighted average of the inner iterates x₀ … x_{m−1}.
pub fn snapshot_update(iterates: &[Vec<f64>], rule: SnapshotRule) -> Result<Vec<f64>> {
    let first = iterates
        .first()
        .ok_or_else(|| Error::invalid("snapshot of an empty epoch"))?;
    let mut acc = SnapshotSum::new(first.len(), iterates.len(), rule);
    for (k, x) in iterates.iter().enumerate() {
        acc.add(k, x);
    }
    Ok(acc.finish())
}

/// Running weighted sum; weights are normalized so the last one is 1.
#[derive(Debug, Clone)]
pub(crate) struct SnapshotSum {
    sum: Vec<f64>,
    total: f64,
    m: usize,
    rule: SnapshotRule,
}

impl SnapshotSum {
    pub(crate) fn new(dim: usize, m: usize, rule: SnapshotRule) -> Self {
        Self {
            sum: vec![0.0; dim],
            total: 0.0,
            m,
            rule,
        }
    }

    pub(crate) fn add(&mut self, k: usize, x: &[f64]) {
        let w = match self.rule {
            SnapshotRule::Uniform => 1.0,
            SnapshotRule::Geometric(r) => r.powf(k as f64 - (self.m as f64 - 1.0)),
        };
        linalg::axpy(w, x, &mut self.sum);
        self.total += w;
    }

    pub(crate) fn finish(mut self) -> Vec<f64> {
        linalg::scale(1.0 / self.total, &mut self.sum);
        self.sum
    }
}

pub(crate) fn snapshot_rule(
    regime: Regime,
    weights: ScWeights,
    theta1: f64,
    mu: f64,
    gamma: f64,
) -> SnapshotRule {
    match (regime, weights) {
        (Regime::Nc, _) => SnapshotRule::Uniform,
        (Regime::Sc, ScWeights::Theta3) => SnapshotRule::Geometric(1.0 + mu * gamma / theta1),
        (Regime::Sc, ScWeights::OnePlusTheta1) => SnapshotRule::Geometric(1.0 + theta1),
    }
}

pub(crate) fn inner_len(problem: &CompositeProblem, aopts: &AasvrgOptions) -> Result<usize> {
    let m = aopts.inner.unwrap_or(problem.n_components());
    if m == 0 {
        return Err(Error::invalid("inner loop length must be positive"));
    }
    Ok(m)
}

pub(crate) fn check_regime(problem: &CompositeProblem, theta: &ThetaSchedule) -> Result<()> {
    if theta.regime() == Regime::Sc && !(problem.mu() > 0.0) {
        return Err(Error::invalid(
            "strongly convex regime needs a strongly convex regularizer (mu > 0)",
        ));
    }
    Ok(())
}

/// Momentum-compensated accelerated SVRG. `opts.iters` counts epochs and
/// records are written per epoch; kept iterates are the inner iterates x₁ … x_m
/// of every epoch.
pub fn run_aasvrg(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    schedule: &DelaySchedule,
    aopts: &AasvrgOptions,
    opts: &SolverOptions,
) -> Result<Trace> {
    check_regime(problem, theta)?;
    let mut x = opts.validate(problem)?;
    let m = inner_len(problem, aopts)?;
    let epochs = opts.iters;
    schedule.check_horizon(epochs * m)?;
    let smooth = problem.smooth();
    let dim = x.len();
    let n = problem.n_components();
    let tau = schedule.tau();
    let theta2 = theta.theta2();
    let mut z = x.clone();
    let mut snap = Snapshot::new(problem, x.clone());
    let mut w = vec![0.0; dim];
    let mut dir = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    let comps = component_stream(opts.seed);
    let mut rec = Recorder::new(problem, opts);
    for s in 0..epochs {
        rec.grad_evals += n as u64;
        let t1 = theta.theta(s as i64);
        let a = 1.0 - theta2 - t1;
        let rule = snapshot_rule(theta.regime(), aopts.sc_weights, t1, problem.mu(), opts.gamma);
        let mut acc = SnapshotSum::new(dim, m, rule);
        // x_{−1} … x_k of this epoch; local index 0 stands in for −1.
        let mut hist: History<Vec<f64>> = History::new(tau + 2);
        hist.push(x.clone());
        let start = s * m;
        let c_max = comp_sum_aasvrg(a, tau)?;
        for k in 0..m {
            acc.add(k, &x);
            let jl = schedule.j(start + k).saturating_sub(start);
            let xj = hist.get(jl);
            let xp = hist.get(jl.saturating_sub(1));
            for e in 0..dim {
                dir[e] = xj[e] - xp[e];
            }
            let i = comps.index((start + k) as u64, n);
            let g = match aopts.grad_mode {
                GradMode::Exact => {
                    let c = comp_sum_aasvrg(a, k - jl)?;
                    for e in 0..dim {
                        w[e] = xj[e] + c * dir[e];
                    }
                    vr_grad(problem, &w, &snap, i)?
                }
                GradMode::Hvp => {
                    let alpha = c_max - comp_sum_aasvrg(a, k - jl)?;
                    for e in 0..dim {
                        w[e] = xj[e] + c_max * dir[e];
                    }
                    let cw = smooth.component_coeff(&w, i) - alpha * smooth.hvp_coeff(&w, &dir, i);
                    let mut g = snap.full_grad().to_vec();
                    smooth.add_row(i, cw - snap.component_coeff(smooth, i), &mut g);
                    g
                }
            };
            rec.grad_evals += 1;
            problem
                .nonsmooth()
                .prox_full_into(&z, &g, t1 / opts.gamma, &mut delta);
            linalg::axpy(1.0, &delta, &mut z);
            let xt = snap.point();
            for e in 0..dim {
                x[e] = t1 * z[e] + theta2 * xt[e] + a * x[e];
            }
            let mut slot = hist.recycle().unwrap_or_else(|| vec![0.0; dim]);
            slot.copy_from_slice(&x);
            hist.push(slot);
            rec.push_iterate(&x);
        }
        let next = acc.finish();
        rec.push_snapshot(&next);
        if s + 1 < epochs {
            snap = Snapshot::new(problem, next);
        }
        if rec.due(s + 1, epochs) {
            rec.record(s + 1, &x);
        }
    }
    Ok(rec.finish(x))
}

/// Serial accelerated SVRG written directly in terms of the look-ahead point
/// y_k = θ₁z_k + θ₂x̃ + a·x_k (y₀ = x₀).
pub fn run_accelerated_svrg(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    aopts: &AasvrgOptions,
    opts: &SolverOptions,
) -> Result<Trace> {
    check_regime(problem, theta)?;
    let mut x = opts.validate(problem)?;
    let m = inner_len(problem, aopts)?;
    let epochs = opts.iters;
    let dim = x.len();
    let n = problem.n_components();
    let theta2 = theta.theta2();
    let mut z = x.clone();
    let mut snap = Snapshot::new(problem, x.clone());
    let mut y = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    let comps = component_stream(opts.seed);
    let mut rec = Recorder::new(problem, opts);
    for s in 0..epochs {
        rec.grad_evals += n as u64;
        let t1 = theta.theta(s as i64);
        let a = 1.0 - theta2 - t1;
        let rule = snapshot_rule(theta.regime(), aopts.sc_weights, t1, problem.mu(), opts.gamma);
        let mut iterates = Vec::with_capacity(m);
        for k in 0..m {
            iterates.push(x.clone());
            if k == 0 {
                y.copy_from_slice(&x);
            } else {
                let xt = snap.point();
                for e in 0..dim {
                    y[e] = t1 * z[e] + theta2 * xt[e] + a * x[e];
                }
            }
            let i = comps.index((s * m + k) as u64, n);
            let g = vr_grad(problem, &y, &snap, i)?;
            rec.grad_evals += 1;
            problem
                .nonsmooth()
                .prox_full_into(&z, &g, t1 / opts.gamma, &mut delta);
            linalg::axpy(1.0, &delta, &mut z);
            let xt = snap.point();
            for e in 0..dim {
                x[e] = t1 * z[e] + theta2 * xt[e] + a * x[e];
            }
            rec.push_iterate(&x);
        }
        let next = snapshot_update(&iterates, rule)?;
        rec.push_snapshot(&next);
        if s + 1 < epochs {
            snap = Snapshot::new(problem, next);
        }
        if rec.due(s + 1, epochs) {
            rec.record(s + 1, &x);
        }
    }
    Ok(rec.finish(x))
}
