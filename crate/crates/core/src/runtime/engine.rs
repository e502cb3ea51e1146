use std::sync::{Arc, Mutex};
use std::thread;

use crate::error::{Error, Result};
use crate::momentum::ThetaSchedule;
use crate::problem::CompositeProblem;
use crate::solvers::{AasvrgOptions, Recorder, SolverOptions, StepRule, Trace};

use super::delaylog::{measure_delay, DelayHistogram};
use super::kernels::{AagdKernel, AascdKernel, AasvrgKernel, AsvrgKernel, Kernel, SgdKernel};
use super::lock::SpinLock;
use super::queue::UpdateOrderQueue;
use super::shared::Mode;

/// Environment variable holding the default thread count.
pub const THREADS_ENV: &str = "MOMCOMP_THREADS";

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&p| p > 0)
}

/// Algorithm run by [`run_parallel`].
#[derive(Debug, Clone, PartialEq)]
pub enum ParallelAlgo {
    Aagd(ThetaSchedule),
    Aascd(ThetaSchedule),
    /// `SolverOptions::iters` counts epochs.
    Aasvrg(ThetaSchedule, AasvrgOptions),
    Sgd(StepRule),
    /// `SolverOptions::iters` counts epochs.
    Asvrg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelConfig {
    pub threads: usize,
    pub mode: Mode,
    /// Apply updates strictly in iteration order.
    pub order_queue: bool,
    /// Record (k, j) for every update.
    pub log_delays: bool,
    /// Record every state and every read (atom mode; expensive).
    pub log_reads: bool,
    /// Stop at the first record whose residual is at or below this.
    pub target: Option<f64>,
}

impl ParallelConfig {
    pub fn new(threads: usize, mode: Mode) -> Self {
        Self {
            threads,
            mode,
            order_queue: false,
            log_delays: false,
            log_reads: false,
            target: None,
        }
    }

    pub fn order_queue(mut self, on: bool) -> Self {
        self.order_queue = on;
        self
    }

    pub fn log_delays(mut self, on: bool) -> Self {
        self.log_delays = on;
        self
    }

    pub fn log_reads(mut self, on: bool) -> Self {
        self.log_reads = on;
        self
    }

    pub fn target(mut self, residual: f64) -> Self {
        self.target = Some(residual);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParallelRun {
    pub trace: Trace,
    /// Updates applied.
    pub steps: u64,
    /// (k, j): update k was computed from the state after j updates. Sorted by k.
    pub delays: Vec<(u64, u64)>,
    /// With read logging: the state after s updates, at index s.
    pub states: Vec<Vec<f64>>,
    /// With read logging: (j, state seen) for every read.
    pub reads: Vec<(u64, Vec<f64>)>,
}

impl ParallelRun {
    pub fn delay_histogram(&self) -> DelayHistogram {
        measure_delay(&self.delays)
    }
}

/// Runs `algo` on `threads` workers sharing one parameter state.
///
/// Workers claim iteration indices, read the shared state, compute a
/// compensated gradient from it and apply a proximal step. Records are taken
/// at block boundaries where all workers are joined; the variance-reduced
/// methods use one block per epoch.
pub fn run_parallel(
    problem: &CompositeProblem,
    algo: &ParallelAlgo,
    opts: &SolverOptions,
    cfg: &ParallelConfig,
) -> Result<ParallelRun> {
    if cfg.threads == 0 {
        return Err(Error::invalid("thread count must be at least 1"));
    }
    let global = Arc::new(SpinLock::new());
    let steps = Plan::Steps(opts.iters);
    match algo {
        ParallelAlgo::Aagd(theta) => {
            let k = AagdKernel::new(problem, theta, opts, cfg.mode, cfg.order_queue)?;
            drive(k, problem, opts, cfg, steps, &global)
        }
        ParallelAlgo::Aascd(theta) => {
            let k = AascdKernel::new(problem, theta, opts, cfg.mode, cfg.order_queue, global.clone())?;
            drive(k, problem, opts, cfg, steps, &global)
        }
        ParallelAlgo::Aasvrg(theta, aopts) => {
            let k = AasvrgKernel::new(problem, theta, *aopts, opts, cfg.mode, cfg.threads)?;
            let plan = Plan::Epochs(k.inner(), opts.iters);
            drive(k, problem, opts, cfg, plan, &global)
        }
        ParallelAlgo::Sgd(rule) => {
            let k = SgdKernel::new(problem, *rule, opts, cfg.mode)?;
            drive(k, problem, opts, cfg, steps, &global)
        }
        ParallelAlgo::Asvrg => {
            let k = AsvrgKernel::new(problem, opts, cfg.mode)?;
            let plan = Plan::Epochs(k.inner(), opts.iters);
            drive(k, problem, opts, cfg, plan, &global)
        }
    }
}

/// Where records fall.
#[derive(Debug, Clone, Copy)]
enum Plan {
    Steps(usize),
    /// Inner length and epoch count.
    Epochs(usize, usize),
}

impl Plan {
    fn total(&self) -> usize {
        match *self {
            Plan::Steps(n) => n,
            Plan::Epochs(m, e) => m * e,
        }
    }

    /// Next boundary after `start` and the record label there, if any.
    fn boundary(&self, start: usize, rec: &Recorder) -> (usize, Option<usize>) {
        match *self {
            Plan::Steps(total) => {
                let end = (start + 1..=total)
                    .find(|&s| rec.due(s, total))
                    .unwrap_or(total);
                (end, rec.due(end, total).then_some(end))
            }
            Plan::Epochs(m, epochs) => {
                let s = start / m + 1;
                (s * m, rec.due(s, epochs).then_some(s))
            }
        }
    }
}

#[derive(Default)]
struct WorkerLog {
    delays: Vec<(u64, u64)>,
    states: Vec<(usize, Vec<f64>)>,
    reads: Vec<(u64, Vec<f64>)>,
}

/// Aborts the order queue if a worker unwinds, so no peer waits forever.
struct AbortOnPanic<'a>(&'a UpdateOrderQueue);

impl Drop for AbortOnPanic<'_> {
    fn drop(&mut self) {
        if thread::panicking() {
            self.0.abort();
        }
    }
}

struct Shared<'a> {
    queue: UpdateOrderQueue,
    global: &'a SpinLock,
    failure: Mutex<Option<Error>>,
}

impl Shared<'_> {
    fn fail(&self, e: Error) {
        let mut f = self.failure.lock().unwrap_or_else(|p| p.into_inner());
        f.get_or_insert(e);
        self.queue.abort();
    }
}

fn worker<K: Kernel>(kernel: &K, sh: &Shared, cfg: &ParallelConfig, end: usize) -> WorkerLog {
    let _guard = AbortOnPanic(&sh.queue);
    let mut log = WorkerLog::default();
    let atom = cfg.mode == Mode::Atom;
    while !sh.queue.is_aborted() {
        let k = sh.queue.ticket();
        if k >= end {
            break;
        }
        let read = {
            let _g = atom.then(|| sh.global.lock());
            let j = sh.queue.applied();
            if cfg.log_reads {
                log.reads.push((j as u64, kernel.state()));
            }
            kernel.read(k, j).map(|r| (j, r))
        };
        let (j, r) = match read {
            Ok(v) => v,
            Err(e) => {
                sh.fail(e);
                break;
            }
        };
        let update = match kernel.compute(k, r) {
            Ok(u) => u,
            Err(e) => {
                sh.fail(e);
                break;
            }
        };
        if cfg.order_queue && !sh.queue.wait_turn(k) {
            break;
        }
        let applied = {
            let _g = atom.then(|| sh.global.lock());
            let slot = sh.queue.applied();
            let res = kernel.apply(k, slot, update);
            if res.is_ok() {
                if cfg.log_reads {
                    log.states.push((slot + 1, kernel.state()));
                }
                sh.queue.advance();
            }
            res
        };
        if let Err(e) = applied {
            sh.fail(e);
            break;
        }
        if cfg.log_delays {
            log.delays.push((k as u64, j as u64));
        }
    }
    log
}

fn drive<K: Kernel>(
    mut kernel: K,
    problem: &CompositeProblem,
    opts: &SolverOptions,
    cfg: &ParallelConfig,
    plan: Plan,
    global: &SpinLock,
) -> Result<ParallelRun> {
    let sh = Shared {
        queue: UpdateOrderQueue::new(),
        global,
        failure: Mutex::new(None),
    };
    let mut rec = Recorder::new(problem, opts);
    let mut run = ParallelRun::default();
    let mut states = Vec::new();
    if cfg.log_reads {
        states.push((0, kernel.state()));
    }
    let total = plan.total();
    let mut start = 0;
    while start < total {
        let (limit, label) = plan.boundary(start, &rec);
        let end = kernel.prepare(start, limit)?;
        debug_assert!(end > start && end <= limit);
        sh.queue.resume_at(start);
        let logs: Vec<WorkerLog> = thread::scope(|sc| {
            let kernel = &kernel;
            let sh = &sh;
            let handles: Vec<_> = (0..cfg.threads)
                .map(|_| sc.spawn(move || worker(kernel, sh, cfg, end)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
                .collect()
        });
        if let Some(e) = sh.failure.lock().unwrap_or_else(|p| p.into_inner()).take() {
            return Err(e);
        }
        for log in logs {
            run.delays.extend(log.delays);
            run.reads.extend(log.reads);
            states.extend(log.states);
        }
        rec.grad_evals += kernel.evals(start, end);
        kernel.finish(end)?;
        start = end;
        if end == limit {
            if let Some(label) = label {
                rec.record(label, &kernel.x());
                let reached = cfg
                    .target
                    .zip(rec.last())
                    .is_some_and(|(t, r)| r.residual <= t);
                if reached {
                    break;
                }
            }
        }
    }
    run.delays.sort_unstable();
    states.sort_by_key(|(s, _)| *s);
    run.states = states.into_iter().map(|(_, s)| s).collect();
    run.steps = start as u64;
    run.trace = rec.finish(kernel.x());
    Ok(run)
}
