use std::sync::{Mutex, MutexGuard};

use crate::delay::CounterStream;
use crate::error::{Error, Result};
use crate::linalg;
use crate::momentum::{comp_sum_aasvrg, ThetaSchedule};
use crate::problem::{vr_grad, CompositeProblem, Snapshot};
use crate::runtime::shared::Mode;
use crate::solvers::{
    check_regime, component_stream, inner_len, snapshot_rule, AasvrgOptions, GradMode,
    SnapshotSum, SolverOptions,
};

use super::Kernel;

fn atom_only(name: &str, mode: Mode) -> Result<()> {
    if mode == Mode::Wild {
        return Err(Error::Unsupported(format!(
            "{name} needs consistent reads of its dense iterate (and snapshot sums); use atom mode"
        )));
    }
    Ok(())
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// Inner-loop state of one AASVRG epoch.
struct AasvrgState {
    x: Vec<f64>,
    /// x_{k−1}, or x₀ at the start of an epoch.
    xp: Vec<f64>,
    z: Vec<f64>,
    delta: Vec<f64>,
    acc: SnapshotSum,
}

/// Epoch constants of AASVRG.
#[derive(Debug, Clone, Copy)]
struct EpochParams {
    t1: f64,
    a: f64,
    c_max: f64,
}

/// AASVRG; every read sees the current iterate and its predecessor.
pub(crate) struct AasvrgKernel<'a> {
    problem: &'a CompositeProblem,
    theta: &'a ThetaSchedule,
    aopts: AasvrgOptions,
    gamma: f64,
    m: usize,
    epochs: usize,
    /// Largest possible delay: P − 1.
    tau: usize,
    comps: CounterStream,
    snap: Snapshot,
    epoch: usize,
    params: EpochParams,
    state: Mutex<AasvrgState>,
}

impl<'a> AasvrgKernel<'a> {
    pub fn new(
        problem: &'a CompositeProblem,
        theta: &'a ThetaSchedule,
        aopts: AasvrgOptions,
        opts: &SolverOptions,
        mode: Mode,
        threads: usize,
    ) -> Result<Self> {
        atom_only("AASVRG", mode)?;
        check_regime(problem, theta)?;
        let x = opts.validate(problem)?;
        let m = inner_len(problem, &aopts)?;
        let dim = x.len();
        let mut k = Self {
            problem,
            theta,
            aopts,
            gamma: opts.gamma,
            m,
            epochs: opts.iters,
            tau: threads - 1,
            comps: component_stream(opts.seed),
            snap: Snapshot::new(problem, x.clone()),
            epoch: 0,
            params: EpochParams {
                t1: 0.0,
                a: 0.0,
                c_max: 0.0,
            },
            state: Mutex::new(AasvrgState {
                xp: x.clone(),
                z: x.clone(),
                x,
                delta: vec![0.0; dim],
                acc: SnapshotSum::new(dim, m, crate::solvers::SnapshotRule::Uniform),
            }),
        };
        k.start_epoch(0)?;
        Ok(k)
    }

    pub fn inner(&self) -> usize {
        self.m
    }

    fn start_epoch(&mut self, s: usize) -> Result<()> {
        let t1 = self.theta.theta(s as i64);
        let a = 1.0 - self.theta.theta2() - t1;
        let rule = snapshot_rule(
            self.theta.regime(),
            self.aopts.sc_weights,
            t1,
            self.problem.mu(),
            self.gamma,
        );
        let c_max = comp_sum_aasvrg(a, self.tau)?;
        self.epoch = s;
        self.params = EpochParams { t1, a, c_max };
        let st = self.state.get_mut().unwrap_or_else(|e| e.into_inner());
        st.acc = SnapshotSum::new(st.x.len(), self.m, rule);
        st.xp.copy_from_slice(&st.x);
        Ok(())
    }
}

pub(crate) struct SvrgRead {
    i: usize,
    w: Vec<f64>,
    /// Direction and α of the first-order correction in hvp mode.
    hvp: Option<(Vec<f64>, f64)>,
}

impl Kernel for AasvrgKernel<'_> {
    type Read = SvrgRead;
    type Update = Vec<f64>;

    fn prepare(&mut self, _start: usize, limit: usize) -> Result<usize> {
        Ok(limit)
    }

    fn read(&self, k: usize, j: usize) -> Result<SvrgRead> {
        let st = lock(&self.state);
        let start = self.epoch * self.m;
        let delay = (k - start)
            .saturating_sub(j.saturating_sub(start))
            .min(self.tau);
        let EpochParams { a, c_max, .. } = self.params;
        let dir: Vec<f64> = st.x.iter().zip(&st.xp).map(|(x, p)| x - p).collect();
        let i = self.comps.index(k as u64, self.problem.n_components());
        let (c, hvp) = match self.aopts.grad_mode {
            GradMode::Exact => (comp_sum_aasvrg(a, delay)?, None),
            GradMode::Hvp => (c_max, Some(c_max - comp_sum_aasvrg(a, delay)?)),
        };
        let w = st.x.iter().zip(&dir).map(|(x, d)| x + c * d).collect();
        Ok(SvrgRead {
            i,
            w,
            hvp: hvp.map(|alpha| (dir, alpha)),
        })
    }

    fn compute(&self, _k: usize, r: SvrgRead) -> Result<Vec<f64>> {
        match r.hvp {
            None => vr_grad(self.problem, &r.w, &self.snap, r.i),
            Some((dir, alpha)) => {
                let smooth = self.problem.smooth();
                smooth.check_component(r.i)?;
                let cw = smooth.component_coeff(&r.w, r.i) - alpha * smooth.hvp_coeff(&r.w, &dir, r.i);
                let mut g = self.snap.full_grad().to_vec();
                smooth.add_row(r.i, cw - self.snap.component_coeff(smooth, r.i), &mut g);
                Ok(g)
            }
        }
    }

    fn apply(&self, _k: usize, slot: usize, g: Vec<f64>) -> Result<()> {
        let mut guard = lock(&self.state);
        let st = &mut *guard;
        let EpochParams { t1, a, .. } = self.params;
        let theta2 = self.theta.theta2();
        st.acc.add(slot - self.epoch * self.m, &st.x);
        self.problem
            .nonsmooth()
            .prox_full_into(&st.z, &g, t1 / self.gamma, &mut st.delta);
        linalg::axpy(1.0, &st.delta, &mut st.z);
        st.xp.copy_from_slice(&st.x);
        let xt = self.snap.point();
        for e in 0..st.x.len() {
            st.x[e] = t1 * st.z[e] + theta2 * xt[e] + a * st.x[e];
        }
        Ok(())
    }

    fn finish(&mut self, end: usize) -> Result<()> {
        if end % self.m != 0 {
            return Ok(());
        }
        let s = end / self.m - 1;
        let st = self.state.get_mut().unwrap_or_else(|e| e.into_inner());
        let acc = std::mem::replace(
            &mut st.acc,
            SnapshotSum::new(0, 1, crate::solvers::SnapshotRule::Uniform),
        );
        let next = acc.finish();
        if s + 1 < self.epochs {
            self.snap = Snapshot::new(self.problem, next);
            self.start_epoch(s + 1)?;
        }
        Ok(())
    }

    fn x(&self) -> Vec<f64> {
        lock(&self.state).x.clone()
    }

    fn evals(&self, start: usize, end: usize) -> u64 {
        let snapshot = if start % self.m == 0 {
            self.problem.n_components()
        } else {
            0
        };
        (end - start + snapshot) as u64
    }

    fn state(&self) -> Vec<f64> {
        let st = lock(&self.state);
        let mut s = st.x.clone();
        s.extend_from_slice(&st.z);
        s
    }
}

struct AsvrgState {
    x: Vec<f64>,
    sum: Vec<f64>,
    delta: Vec<f64>,
}

/// Proximal SVRG with inner length 2n, restarting each epoch from the mean
/// inner iterate.
pub(crate) struct AsvrgKernel<'a> {
    problem: &'a CompositeProblem,
    gamma: f64,
    m: usize,
    epochs: usize,
    comps: CounterStream,
    snap: Snapshot,
    state: Mutex<AsvrgState>,
}

impl<'a> AsvrgKernel<'a> {
    pub fn new(problem: &'a CompositeProblem, opts: &SolverOptions, mode: Mode) -> Result<Self> {
        atom_only("the SVRG baseline", mode)?;
        let x = opts.validate(problem)?;
        let dim = x.len();
        Ok(Self {
            problem,
            gamma: opts.gamma,
            m: 2 * problem.n_components(),
            epochs: opts.iters,
            comps: component_stream(opts.seed),
            snap: Snapshot::new(problem, x.clone()),
            state: Mutex::new(AsvrgState {
                x,
                sum: vec![0.0; dim],
                delta: vec![0.0; dim],
            }),
        })
    }

    pub fn inner(&self) -> usize {
        self.m
    }
}

impl Kernel for AsvrgKernel<'_> {
    type Read = (usize, Vec<f64>);
    type Update = Vec<f64>;

    fn prepare(&mut self, _start: usize, limit: usize) -> Result<usize> {
        Ok(limit)
    }

    fn read(&self, k: usize, _j: usize) -> Result<(usize, Vec<f64>)> {
        let i = self.comps.index(k as u64, self.problem.n_components());
        Ok((i, lock(&self.state).x.clone()))
    }

    fn compute(&self, _k: usize, (i, x): (usize, Vec<f64>)) -> Result<Vec<f64>> {
        vr_grad(self.problem, &x, &self.snap, i)
    }

    fn apply(&self, _k: usize, _slot: usize, g: Vec<f64>) -> Result<()> {
        let mut guard = lock(&self.state);
        let st = &mut *guard;
        self.problem
            .nonsmooth()
            .prox_full_into(&st.x, &g, 1.0 / self.gamma, &mut st.delta);
        for e in 0..st.x.len() {
            st.x[e] += st.delta[e];
            st.sum[e] += st.x[e];
        }
        Ok(())
    }

    fn finish(&mut self, end: usize) -> Result<()> {
        if end % self.m != 0 {
            return Ok(());
        }
        let s = end / self.m - 1;
        let st = self.state.get_mut().unwrap_or_else(|e| e.into_inner());
        for e in 0..st.x.len() {
            st.x[e] = st.sum[e] / self.m as f64;
            st.sum[e] = 0.0;
        }
        if s + 1 < self.epochs {
            self.snap = Snapshot::new(self.problem, st.x.clone());
        }
        Ok(())
    }

    fn x(&self) -> Vec<f64> {
        lock(&self.state).x.clone()
    }

    fn evals(&self, start: usize, end: usize) -> u64 {
        let snapshot = if start % self.m == 0 {
            self.problem.n_components()
        } else {
            0
        };
        (end - start + snapshot) as u64
    }

    fn state(&self) -> Vec<f64> {
        lock(&self.state).x.clone()
    }
}
