//! Subcommand bodies.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use momcomp::problem::synth::{synthesize, SynthTask};
use momcomp::runtime::{speedup as speedup_report, SpeedupReport};
use momcomp::solvers::{SolverOptions, Trace};

use crate::cache;
use crate::exit::UsageError;
use crate::run::{self, Exec};
use crate::settings::Settings;
use crate::setup::{self, Built};

const DEFAULT_CACHE: &str = ".momcomp-cache";
const SPEEDUP_ITERS: usize = 1_000_000;
const SPEEDUP_EPOCHS: usize = 1000;

fn cache_dir(s: &Settings) -> Result<PathBuf> {
    Ok(s.get("cache-dir")?.unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE)))
}

fn optimum(s: &Settings, b: &Built) -> Result<f64> {
    let found = cache::fstar(b, &cache_dir(s)?)?;
    log::info!(
        "optimal value {:e} ({})",
        found.fstar.value,
        if found.hit { "cached" } else { "computed" }
    );
    Ok(found.fstar.value)
}

/// Writes to `out`, or to standard output when absent.
fn emit(out: Option<&PathBuf>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(f);
            write(&mut w)?;
            w.flush().with_context(|| format!("writing {}", path.display()))?;
        }
        None => write(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn summary(t: &Trace) -> String {
    match t.last() {
        Some(r) => format!(
            "final residual {:e}, grad evals {}, seconds {:.3}",
            r.residual, r.grad_evals, r.seconds
        ),
        None => "no records".to_string(),
    }
}

pub fn run(s: &Settings) -> Result<()> {
    let b = setup::build(s)?;
    let mut plan = run::plan(s, &b.problem)?;
    if !s.flag("no-fstar")? {
        plan.opts.f_star = Some(optimum(s, &b)?);
    }
    let trace = run::execute(&b.problem, &plan)?;
    let out: Option<PathBuf> = s.get("out")?;
    emit(out.as_ref(), |w| Ok(trace.write_csv(w)?))?;
    if out.is_some() {
        println!("{}", summary(&trace));
    } else {
        eprintln!("{}", summary(&trace));
    }
    Ok(())
}

pub fn fstar(s: &Settings) -> Result<()> {
    let b = setup::build(s)?;
    let found = cache::fstar(&b, &cache_dir(s)?)?;
    let f = &found.fstar;
    println!(
        "fstar {:e} gradient-map norm {:e} iterations {} converged {} {} {}",
        f.value,
        f.grad_map_norm,
        f.iters,
        f.converged,
        if found.hit { "cached" } else { "computed" },
        found.path.display()
    );
    Ok(())
}

pub fn speedup(s: &Settings) -> Result<()> {
    if s.has("tau") {
        return Err(UsageError::new("speedup runs on threads; tau does not apply").into());
    }
    let b = setup::build(s)?;
    let f_star = optimum(s, &b)?;
    let target = s.get_or("target", 1e-6)?;
    let mut threads = s.list::<usize>("threads-list")?.unwrap_or_else(|| vec![1, 2, 4]);
    if threads.is_empty() || threads.contains(&0) {
        return Err(UsageError::new("threads-list needs positive thread counts").into());
    }
    threads.dedup();

    let run_with = |p: usize| -> Result<Trace> {
        let mut sp = s.clone();
        sp.set("threads", p);
        let method = sp.get::<run::Method>("algo")?;
        if let Some(m) = method {
            let key = if m.epochs() { "epochs" } else { "iters" };
            if !sp.has(key) {
                sp.set(key, if m.epochs() { SPEEDUP_EPOCHS } else { SPEEDUP_ITERS });
            }
        }
        let mut plan = run::plan(&sp, &b.problem)?;
        plan.opts = SolverOptions {
            f_star: Some(f_star),
            ..plan.opts
        };
        if let Exec::Threads(cfg) = &mut plan.exec {
            cfg.target = Some(target);
        }
        let t = run::execute(&b.problem, &plan)?;
        log::info!("P={p}: {}", summary(&t));
        Ok(t)
    };

    let serial = run_with(1)?;
    let mut runs = Vec::with_capacity(threads.len());
    for &p in &threads {
        let t = if p == 1 { serial.clone() } else { run_with(p)? };
        runs.push((p, t));
    }
    let report = speedup_report(&serial, &runs, target)?;
    let out: Option<PathBuf> = s.get("out")?;
    emit(out.as_ref(), |w| Ok(report.write_csv(w)?))?;
    if SpeedupReport::TIME_IS_HARDWARE_DEPENDENT {
        log::info!("time_speedup depends on the machine; iter_speedup does not");
    }
    Ok(())
}

pub fn synth(s: &Settings) -> Result<()> {
    let task = match s.raw("task") {
        Some(t) => setup::parse_task(t)?,
        None => SynthTask::Regression,
    };
    let spec = setup::synth_spec(s, task)?;
    let out: PathBuf = s
        .get("out")?
        .ok_or_else(|| UsageError::new("synth needs --out"))?;
    let mut data = synthesize(&spec)?.data;
    if s.flag("normalize")? {
        data.normalize_rows();
    }
    data.write_libsvm(&out)?;
    let m = &data.features;
    let density = m.nnz() as f64 / (m.rows() as f64 * m.cols() as f64);
    let cond = match spec.condition {
        Some(_) => format!(" condition {:.4e}", momcomp::problem::synth::gram_condition(&data)?),
        None => String::new(),
    };
    println!(
        "wrote {} rows {} cols {} nonzeros density {density:.6}{cond} to {}",
        m.rows(),
        m.cols(),
        m.nnz(),
        out.display()
    );
    Ok(())
}
