use crate::delay::{CounterStream, DelaySchedule, StreamTag};
use crate::error::{Error, Result};
use crate::momentum::{comp_sum_aascd_with, AascdCompensation, ScaledScalar, ThetaSchedule};
use crate::problem::{CompositeProblem, DualSvmProblem};

use super::history::History;
use super::trace::{Recorder, SolverOptions, Trace};
use super::uv::UvScale;

/// Which equivalent loop runs the compensated coordinate method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AascdForm {
    /// Dense x and z, O(dim) per step.
    Naive,
    /// Sparse (u, v, d) state with maintained products M·u and M·v.
    Efficient,
}

/// Stream of sampled coordinates shared by every form of the method.
pub fn coordinate_stream(seed: u64) -> CounterStream {
    CounterStream::new(seed, StreamTag::Coordinate)
}

pub(crate) fn check_separable(problem: &CompositeProblem) -> Result<()> {
    if problem.nonsmooth().is_separable() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "coordinate descent needs a coordinate-separable regularizer".into(),
        ))
    }
}

/// Momentum-compensated accelerated coordinate descent.
pub fn run_aascd(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    schedule: &DelaySchedule,
    form: AascdForm,
    opts: &SolverOptions,
) -> Result<Trace> {
    match form {
        AascdForm::Naive => {
            run_aascd_naive_with(problem, theta, schedule, AascdCompensation::Exact, opts)
        }
        AascdForm::Efficient => run_aascd_efficient(problem, theta, schedule, opts),
    }
}

/// Serial accelerated proximal coordinate gradient: gradients at the current yᵏ.
pub fn run_apcg(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    opts: &SolverOptions,
) -> Result<Trace> {
    check_separable(problem)?;
    let mut x = opts.validate(problem)?;
    let mut z = x.clone();
    let dim = x.len();
    let n = dim as f64;
    let mut y = vec![0.0; dim];
    let coords = coordinate_stream(opts.seed);
    let mut rec = Recorder::new(problem, opts);
    let k_max = opts.iters;
    for k in 0..k_max {
        let t = theta.theta(k as i64);
        for c in 0..dim {
            y[c] = (1.0 - t) * x[c] + t * z[c];
        }
        let i = coords.index(k as u64, dim);
        let g = problem.smooth().coord_grad(&y, i);
        rec.grad_evals += 1;
        let delta = problem
            .nonsmooth()
            .prox_coord(i, z[i], g, n * t / opts.gamma)?;
        z[i] += delta;
        x.copy_from_slice(&y);
        x[i] += n * t * delta;
        rec.push_iterate(&x);
        if rec.due(k + 1, k_max) {
            rec.record(k + 1, &x);
        }
    }
    Ok(rec.finish(x))
}

/// Dense form with a selectable compensation variant.
pub fn run_aascd_naive_with(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    schedule: &DelaySchedule,
    variant: AascdCompensation,
    opts: &SolverOptions,
) -> Result<Trace> {
    check_separable(problem)?;
    let mut x = opts.validate(problem)?;
    schedule.check_horizon(opts.iters)?;
    let dim = x.len();
    let n = dim as f64;
    let mut z = x.clone();
    let mut w = vec![0.0; dim];
    // (xʲ, zʲ) for j = k−τ−1 … k; index 0 also stands in for index −1.
    let mut hist: History<(Vec<f64>, Vec<f64>)> = History::new(schedule.tau() + 2);
    hist.push((x.clone(), z.clone()));
    let coords = coordinate_stream(opts.seed);
    let mut rec = Recorder::new(problem, opts);
    let k_max = opts.iters;
    for k in 0..k_max {
        let j = schedule.j(k);
        let tj = theta.theta(j as i64);
        let c = comp_sum_aascd_with(theta, j, k, variant)?;
        let (xj, zj) = hist.get(j);
        let base = match variant {
            AascdCompensation::Exact => xj,
            _ => &hist.get(j.saturating_sub(1)).0,
        };
        for e in 0..dim {
            let yj = (1.0 - tj) * xj[e] + tj * zj[e];
            w[e] = yj + c * (yj - base[e]);
        }
        let i = coords.index(k as u64, dim);
        let g = problem.smooth().coord_grad(&w, i);
        rec.grad_evals += 1;
        let t = theta.theta(k as i64);
        let delta = problem
            .nonsmooth()
            .prox_coord(i, z[i], g, n * t / opts.gamma)?;
        for e in 0..dim {
            x[e] = (1.0 - t) * x[e] + t * z[e];
        }
        x[i] += n * t * delta;
        z[i] += delta;
        let mut slot = hist
            .recycle()
            .unwrap_or_else(|| (vec![0.0; dim], vec![0.0; dim]));
        slot.0.copy_from_slice(&x);
        slot.1.copy_from_slice(&z);
        hist.push(slot);
        rec.push_iterate(&x);
        if rec.due(k + 1, k_max) {
            rec.record(k + 1, &x);
        }
    }
    Ok(rec.finish(x))
}

/// One applied coordinate step: coordinate, Δu and stored Δv.
#[derive(Debug, Clone, Copy)]
struct Step {
    coord: usize,
    du: f64,
    dv: f64,
}

fn run_aascd_efficient(
    problem: &CompositeProblem,
    theta: &ThetaSchedule,
    schedule: &DelaySchedule,
    opts: &SolverOptions,
) -> Result<Trace> {
    check_separable(problem)?;
    let x0 = opts.validate(problem)?;
    schedule.check_horizon(opts.iters)?;
    let smooth = problem.smooth();
    let mat = smooth.matrix();
    let mat_t = smooth.matrix_t();
    let (loss, targets, fscale) = (smooth.loss(), smooth.targets(), smooth.scale());
    let dim = x0.len();
    let n = dim as f64;
    let mut u = x0;
    let mut v = vec![0.0; dim];
    let mut pu = mat.mul_vec(&u);
    let mut pv = vec![0.0; mat.rows()];
    let mut d = ScaledScalar::ONE;
    let mut scale = UvScale::default();
    // Steps k−τ … k−1, needed to roll the products back to state j.
    let mut ring: History<Step> = History::new(schedule.tau());
    const NONE: usize = usize::MAX;
    let mut pos = vec![NONE; mat.rows()];
    let mut cu: Vec<f64> = Vec::new();
    let mut cv: Vec<f64> = Vec::new();
    let mut x = vec![0.0; dim];
    let coords = coordinate_stream(opts.seed);
    let mut rec = Recorder::new(problem, opts);
    let k_max = opts.iters;
    for k in 0..k_max {
        let t = theta.theta(k as i64);
        let d_next = d.scaled_mul(1.0 - t);
        let j = schedule.j(k);
        let i = coords.index(k as u64, dim);
        let (rows, vals) = mat_t.row(i);
        cu.clear();
        cv.clear();
        for (p, &r) in rows.iter().enumerate() {
            pos[r] = p;
            cu.push(pu[r]);
            cv.push(pv[r]);
        }
        for s in j..k {
            let st = ring.get(s);
            let (srows, svals) = mat_t.row(st.coord);
            for (&r, &m) in srows.iter().zip(svals) {
                let p = pos[r];
                if p != NONE {
                    cu[p] -= st.du * m;
                    cv[p] -= st.dv * m;
                }
            }
        }
        let c = scale.weight(d_next);
        let mut g = 0.0;
        for (p, (&r, &m)) in rows.iter().zip(vals).enumerate() {
            g += m * loss.deriv(cu[p] + c * cv[p], targets[r]);
            pos[r] = NONE;
        }
        let g = fscale * g;
        rec.grad_evals += 1;
        let delta = problem
            .nonsmooth()
            .prox_coord(i, u[i], g, n * t / opts.gamma)?;
        u[i] += delta;
        for (&r, &m) in rows.iter().zip(vals) {
            pu[r] += delta * m;
        }
        let mut dv = 0.0;
        if d_next.is_zero() {
            // θ = 1: x collapses onto z for this and every older state.
            v.iter_mut().for_each(|e| *e = 0.0);
            pv.iter_mut().for_each(|e| *e = 0.0);
            ring.iter_mut().for_each(|s| s.dv = 0.0);
            d = ScaledScalar::ONE;
            scale = UvScale::default();
        } else {
            dv = -(1.0 - n * t) * delta * scale.inv_weight(d_next);
            v[i] += dv;
            for (&r, &m) in rows.iter().zip(vals) {
                pv[r] += dv * m;
            }
            d = d_next;
            if let Some(f) = scale.rebase(d) {
                v.iter_mut().for_each(|e| *e *= f);
                pv.iter_mut().for_each(|e| *e *= f);
                ring.iter_mut().for_each(|s| s.dv *= f);
                dv *= f;
            }
        }
        if schedule.tau() > 0 {
            ring.push(Step {
                coord: i,
                du: delta,
                dv,
            });
        }
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

/// P(primal_map(α)) − D(α) for a feasible dual point α.
pub fn dual_gap(problem: &DualSvmProblem, alpha: &[f64]) -> Result<f64> {
    problem.duality_gap(alpha)
}
