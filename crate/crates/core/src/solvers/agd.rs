use crate::delay::DelaySchedule;
use crate::error::Result;
use crate::linalg;
use crate::momentum::{comp_sum_aagd_with, CoefficientConvention, ScaledScalar, ThetaSchedule};
use crate::problem::CompositeProblem;

use super::history::History;
use super::trace::{Recorder, SolverOptions, Trace};
use super::uv::UvScale;

/// Which algebraically equivalent loop runs the compensated method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AagdForm {
    /// Keeps x and z and forms w from xʲ and xʲ⁻¹.
    Math,
    /// Keeps (u, v, d) with x = u + d·v, z = u.
    Uv,
}

/// Serial accelerated proximal gradient.
pub fn run_agd(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    opts: &SolverOptions,
) -> Result<Trace> {
    let mut x = opts.validate(problem)?;
    let mut z = x.clone();
    let mut y = vec![0.0; x.len()];
    let mut delta = vec![0.0; x.len()];
    let n = problem.n_components() as u64;
    let mut rec = Recorder::new(problem, opts);
    let k_max = opts.iters;
    for k in 0..k_max {
        let t = theta.theta(k as i64);
        for i in 0..x.len() {
            y[i] = (1.0 - t) * x[i] + t * z[i];
        }
        let g = problem.full_grad(&y);
        rec.grad_evals += n;
        problem
            .nonsmooth()
            .prox_full_into(&z, &g, t / opts.gamma, &mut delta);
        for i in 0..x.len() {
            z[i] += delta[i];
            x[i] = t * z[i] + (1.0 - t) * x[i];
        }
        rec.push_iterate(&x);
        if rec.due(k + 1, k_max) {
            rec.record(k + 1, &x);
        }
    }
    Ok(rec.finish(x))
}

/// Momentum-compensated accelerated gradient under a delay schedule.
pub fn run_aagd(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    schedule: &DelaySchedule,
    form: AagdForm,
    opts: &SolverOptions,
) -> Result<Trace> {
    match form {
        AagdForm::Math => {
            run_aagd_math_with(problem, theta, schedule, CoefficientConvention::Recursion, opts)
        }
        AagdForm::Uv => run_aagd_uv(problem, theta, schedule, opts),
    }
}

/// Math form with a selectable coefficient convention.
pub fn run_aagd_math_with(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    schedule: &DelaySchedule,
    conv: CoefficientConvention,
    opts: &SolverOptions,
) -> Result<Trace> {
    let mut x = opts.validate(problem)?;
    schedule.check_horizon(opts.iters)?;
    let dim = x.len();
    let mut z = x.clone();
    let mut w = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    // States x^{k−τ−1} … x^k; index 0 holds x⁰ (and stands in for x⁻¹).
    let mut hist: History<Vec<f64>> = History::new(schedule.tau() + 2);
    hist.push(x.clone());
    let n = problem.n_components() as u64;
    let mut rec = Recorder::new(problem, opts);
    let k_max = opts.iters;
    for k in 0..k_max {
        let j = schedule.j(k);
        let c = comp_sum_aagd_with(theta, j, k, conv)?;
        let xj = hist.get(j);
        let xp = hist.get(j.saturating_sub(1));
        for i in 0..dim {
            w[i] = xj[i] + c * (xj[i] - xp[i]);
        }
        let g = problem.full_grad(&w);
        rec.grad_evals += n;
        let t = theta.theta(k as i64);
        problem
            .nonsmooth()
            .prox_full_into(&z, &g, t / opts.gamma, &mut delta);
        for i in 0..dim {
            z[i] += delta[i];
            x[i] = t * z[i] + (1.0 - t) * x[i];
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

fn run_aagd_uv(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    schedule: &DelaySchedule,
    opts: &SolverOptions,
) -> Result<Trace> {
    let x0 = opts.validate(problem)?;
    schedule.check_horizon(opts.iters)?;
    let dim = x0.len();
    let mut u = x0;
    let mut v = vec![0.0; dim];
    let mut d = ScaledScalar::ONE;
    let mut scale = UvScale::default();
    let mut w = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    // (uʲ, vʲ) for j = k−τ … k.
    let mut hist: History<(Vec<f64>, Vec<f64>)> = History::new(schedule.tau() + 1);
    hist.push((u.clone(), v.clone()));
    let n = problem.n_components() as u64;
    let mut rec = Recorder::new(problem, opts);
    let k_max = opts.iters;
    for k in 0..k_max {
        let t = theta.theta(k as i64);
        let d_next = d.scaled_mul(1.0 - t);
        let j = schedule.j(k);
        let (uj, vj) = hist.get(j);
        let c = scale.weight(d_next);
        for i in 0..dim {
            w[i] = uj[i] + c * vj[i];
        }
        let g = problem.full_grad(&w);
        rec.grad_evals += n;
        problem
            .nonsmooth()
            .prox_full_into(&u, &g, t / opts.gamma, &mut delta);
        linalg::axpy(1.0, &delta, &mut u);
        if d_next.is_zero() {
            // θ = 1: x^{k+1} = z^{k+1}, and every older state continues to its own z.
            v.iter_mut().for_each(|e| *e = 0.0);
            for (_, hv) in hist.iter_mut() {
                hv.iter_mut().for_each(|e| *e = 0.0);
            }
            d = ScaledScalar::ONE;
            scale = UvScale::default();
        } else {
            let inv = scale.inv_weight(d);
            linalg::axpy(-inv, &delta, &mut v);
            d = d_next;
            if let Some(f) = scale.rebase(d) {
                linalg::scale(f, &mut v);
                for (_, hv) in hist.iter_mut() {
                    linalg::scale(f, hv);
                }
            }
        }
        let mut slot = hist
            .recycle()
            .unwrap_or_else(|| (vec![0.0; dim], vec![0.0; dim]));
        slot.0.copy_from_slice(&u);
        slot.1.copy_from_slice(&v);
        hist.push(slot);
        if rec.keeps_iterates() || rec.due(k + 1, k_max) {
            scale.materialize(&u, &v, d, &mut x);
            rec.push_iterate(&x);
            if rec.due(k + 1, k_max) {
                rec.record(k + 1, &x);
            }
        }
    }
    scale.materialize(&u, &v, d, &mut x);
    Ok(rec.finish(x))
}
