//! Algorithm selection and dispatch to the simulator or the threaded runtime.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;
use momcomp::delay::{make_schedule, DelayKind};
use momcomp::momentum::{
    asvrg_step_size_best, step_size, Algo, Regime, ScheduleParams, StepConstants, ThetaSchedule,
};
use momcomp::problem::CompositeProblem;
use momcomp::runtime::{
    run_parallel, save_delay_log, threads_from_env, Mode, ParallelAlgo, ParallelConfig,
};
use momcomp::solvers::{
    run_aagd, run_aascd, run_aasvrg, run_accelerated_svrg, run_agd, run_apcg,
    run_asvrg_baseline, run_sgd_baseline, AagdForm, AascdForm, AasvrgOptions, GradMode,
    SolverOptions, StepRule, Trace,
};

use crate::exit::UsageError;
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Aagd,
    Aascd,
    Aasvrg,
    Agd,
    Apcg,
    /// Serial accelerated SVRG.
    Svrg,
    /// Unaccelerated asynchronous SVRG.
    Asvrg,
    Sgd,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "aagd" => Method::Aagd,
            "aascd" => Method::Aascd,
            "aasvrg" => Method::Aasvrg,
            "agd" => Method::Agd,
            "apcg" => Method::Apcg,
            "svrg" => Method::Svrg,
            "asvrg" => Method::Asvrg,
            "sgd" => Method::Sgd,
            _ => {
                return Err(format!(
                    "unknown algorithm {s:?} (expected aagd, aascd, aasvrg, agd, apcg, svrg, asvrg or sgd)"
                ))
            }
        })
    }
}

impl Method {
    /// Budget counts epochs rather than steps.
    pub fn epochs(self) -> bool {
        matches!(self, Method::Aasvrg | Method::Svrg | Method::Asvrg)
    }

    fn serial_only(self) -> bool {
        matches!(self, Method::Agd | Method::Apcg | Method::Svrg)
    }

    /// Momentum family whose θ schedule and step-size rule apply.
    fn family(self) -> Option<Algo> {
        match self {
            Method::Aagd | Method::Agd => Some(Algo::Aagd),
            Method::Aascd | Method::Apcg => Some(Algo::Aascd),
            Method::Aasvrg | Method::Svrg => Some(Algo::Aasvrg),
            Method::Asvrg | Method::Sgd => None,
        }
    }
}

/// Where updates are executed.
#[derive(Debug, Clone, PartialEq)]
pub enum Exec {
    /// Deterministic simulation with bounded delay τ.
    Simulated { tau: usize, delay: DelayKind },
    Threads(ParallelConfig),
}

impl Exec {
    /// Delay bound the step sizes are tuned for.
    pub fn tau(&self) -> usize {
        match self {
            Exec::Simulated { tau, .. } => *tau,
            Exec::Threads(c) => c.threads - 1,
        }
    }
}

pub struct RunPlan {
    pub method: Method,
    pub regime: Regime,
    pub exec: Exec,
    pub opts: SolverOptions,
    pub grad_mode: GradMode,
    pub step_rule: StepRule,
    pub delay_log: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError::new(msg).into()
}

pub fn parse_delay(s: &str) -> Result<DelayKind> {
    match s {
        "fixed" => Ok(DelayKind::Fixed),
        "uniform" => Ok(DelayKind::UniformRandom),
        "serial" => Ok(DelayKind::Serial),
        other => Err(usage(format!(
            "unknown delay model {other:?} (expected fixed, uniform or serial)"
        ))),
    }
}

/// Simulator τ or runtime thread count; never both. The thread-count
/// environment variable only applies when `threaded_default` is set.
pub fn exec(s: &Settings, threaded_default: bool) -> Result<Exec> {
    let tau: Option<usize> = s.get("tau")?;
    let mut threads: Option<usize> = s.get("threads")?;
    if tau.is_some() && threads.is_some() {
        return Err(usage("give either tau (simulator) or threads (runtime), not both"));
    }
    if threaded_default && tau.is_none() && threads.is_none() {
        threads = threads_from_env();
    }
    match threads {
        Some(0) => Err(usage("threads must be at least 1")),
        Some(p) => {
            let mode = s
                .get::<Mode>("mode")?
                .unwrap_or(Mode::Atom);
            Ok(Exec::Threads(
                ParallelConfig::new(p, mode)
                    .order_queue(s.flag("order-queue")?)
                    .log_delays(s.has("delay-log")),
            ))
        }
        None => {
            let tau = tau.unwrap_or(0);
            let default = if tau == 0 { "serial" } else { "fixed" };
            let delay = parse_delay(s.raw("delay").unwrap_or(default))?;
            Ok(Exec::Simulated { tau, delay })
        }
    }
}

fn default_gamma(p: &CompositeProblem, method: Method, regime: Regime, tau: usize) -> Result<f64> {
    let consts = |l: f64, n: usize, tau: usize| StepConstants {
        l,
        l_c: p.l_c(),
        mu: p.mu(),
        n,
        tau,
    };
    Ok(match method {
        Method::Aagd => step_size(Algo::Aagd, regime, &consts(p.l(), 1, tau))?,
        Method::Agd => step_size(Algo::Aagd, regime, &consts(p.l(), 1, 0))?,
        Method::Aascd => step_size(Algo::Aascd, regime, &consts(p.l(), p.dim(), tau))?,
        Method::Apcg => step_size(Algo::Aascd, regime, &consts(p.l(), p.dim(), 0))?,
        Method::Aasvrg => step_size(
            Algo::Aasvrg,
            regime,
            &consts(p.constants().l_comp, p.n_components(), tau),
        )?,
        Method::Svrg => step_size(
            Algo::Aasvrg,
            regime,
            &consts(p.constants().l_comp, p.n_components(), 0),
        )?,
        Method::Asvrg => asvrg_step_size_best(p.constants().l_comp, tau)?,
        Method::Sgd => 1.0 / p.constants().l_comp,
    })
}

fn theta(p: &CompositeProblem, plan: &RunPlan) -> Result<Option<ThetaSchedule>> {
    let Some(algo) = plan.method.family() else {
        return Ok(None);
    };
    let tau = if plan.method.serial_only() { 0 } else { plan.exec.tau() };
    let (n, l) = match algo {
        Algo::Aagd => (1, p.l()),
        Algo::Aascd => (p.dim(), p.l()),
        Algo::Aasvrg => (p.n_components(), p.constants().l_comp),
    };
    let params = ScheduleParams {
        n,
        tau,
        gamma: plan.opts.gamma,
        mu: p.mu(),
        l,
    };
    Ok(Some(ThetaSchedule::new(algo, plan.regime, &params)?))
}

pub fn plan(s: &Settings, p: &CompositeProblem) -> Result<RunPlan> {
    let method: Method = s
        .get("algo")?
        .ok_or_else(|| usage("no algorithm given (use --algo)"))?;
    let regime = match s.raw("regime") {
        None | Some("nc") => Regime::Nc,
        Some("sc") => Regime::Sc,
        Some(other) => return Err(usage(format!("unknown regime {other:?} (expected nc or sc)"))),
    };
    let exec = exec(s, !method.serial_only())?;
    let threaded = matches!(exec, Exec::Threads(_));
    if method.serial_only() && (threaded || exec.tau() > 0) {
        return Err(usage(format!("{method:?} is a serial method; drop tau/threads").to_lowercase()));
    }
    // The theorem's step-size hypothesis is checked even when γ is given.
    let gamma_rule = default_gamma(p, method, regime, exec.tau())?;
    let gamma = s.get("gamma")?.unwrap_or(gamma_rule);

    let budget_key = if method.epochs() { "epochs" } else { "iters" };
    let other_key = if method.epochs() { "iters" } else { "epochs" };
    if s.has(other_key) {
        return Err(usage(format!("{method:?} takes --{budget_key}, not --{other_key}").to_lowercase()));
    }
    let iters = s.get_or(budget_key, if method.epochs() { 30 } else { 1000 })?;
    let every_default = match method {
        Method::Aascd | Method::Apcg => p.dim(),
        Method::Sgd => p.n_components(),
        _ => 1,
    };
    let opts = SolverOptions::new(gamma, iters)
        .seed(s.get_or("seed", 0)?)
        .record_every(s.get_or("record-every", every_default)?)
        .wall_clock(threaded || s.flag("wall-clock")?);
    let grad_mode = match s.raw("grad-mode").unwrap_or("exact") {
        "exact" => GradMode::Exact,
        "hvp" => GradMode::Hvp,
        other => return Err(usage(format!("unknown grad-mode {other:?} (expected exact or hvp)"))),
    };
    let step_rule = match s.get::<f64>("sigma0")? {
        Some(sigma0) => StepRule::Decaying { sigma0 },
        None => StepRule::Constant,
    };
    Ok(RunPlan {
        method,
        regime,
        exec,
        opts,
        grad_mode,
        step_rule,
        delay_log: s.get("delay-log")?,
    })
}

/// Steps the delay schedule must cover.
fn horizon(p: &CompositeProblem, plan: &RunPlan) -> usize {
    let n = p.n_components();
    let per = match plan.method {
        Method::Aasvrg => n,
        Method::Asvrg => 2 * n,
        _ => 1,
    };
    (plan.opts.iters * per).max(1)
}

pub fn execute(p: &CompositeProblem, plan: &RunPlan) -> Result<Trace> {
    let theta = theta(p, plan)?;
    let th = || theta.expect("momentum method has a schedule");
    let aopts = AasvrgOptions {
        grad_mode: plan.grad_mode,
        ..Default::default()
    };
    let o = &plan.opts;
    match &plan.exec {
        Exec::Simulated { tau, delay } => {
            let sched = make_schedule(delay.clone(), *tau, horizon(p, plan), o.seed, false)?;
            Ok(match plan.method {
                Method::Aagd => run_aagd(p, &th(), &sched, AagdForm::Uv, o)?,
                Method::Aascd => run_aascd(p, &th(), &sched, AascdForm::Efficient, o)?,
                Method::Aasvrg => run_aasvrg(p, &th(), &sched, &aopts, o)?,
                Method::Agd => run_agd(p, &th(), o)?,
                Method::Apcg => run_apcg(p, &th(), o)?,
                Method::Svrg => run_accelerated_svrg(p, &th(), &aopts, o)?,
                Method::Asvrg => run_asvrg_baseline(p, &sched, o)?,
                Method::Sgd => run_sgd_baseline(p, &sched, plan.step_rule, o)?,
            })
        }
        Exec::Threads(cfg) => {
            let algo = match plan.method {
                Method::Aagd => ParallelAlgo::Aagd(th()),
                Method::Aascd => ParallelAlgo::Aascd(th()),
                Method::Aasvrg => ParallelAlgo::Aasvrg(th(), aopts),
                Method::Asvrg => ParallelAlgo::Asvrg,
                Method::Sgd => ParallelAlgo::Sgd(plan.step_rule),
                m => unreachable!("{m:?} is rejected for the runtime when planning"),
            };
            let run = run_parallel(p, &algo, o, cfg)?;
            if let Some(path) = &plan.delay_log {
                save_delay_log(path, &run.delays)?;
                let h = run.delay_histogram();
                log::info!("delay log: {} updates, max delay {}, mean {:.3}", h.total, h.max(), h.mean());
            }
            Ok(run.trace)
        }
    }
}
