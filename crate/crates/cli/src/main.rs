//! Benchmark driver for the momentum-compensated asynchronous solvers.

mod cache;
mod commands;
mod exit;
mod run;
mod settings;
mod setup;

use std::process::ExitCode;

use anyhow::Result;
use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};

use settings::Settings;

fn value(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("VALUE").help(help)
}

fn switch(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).action(ArgAction::SetTrue).help(help)
}

fn data_args() -> Vec<Arg> {
    vec![
        value("config", "key=value file; command-line flags take precedence"),
        value("data", "LIBSVM dataset; synthetic data is generated when absent"),
        switch("normalize", "scale every sample to unit norm"),
        value("n", "synthetic sample count [default: 1000]").visible_alias("rows"),
        value("d", "synthetic feature count [default: n]").visible_alias("cols"),
        value("density", "synthetic support density [default: 0.1]"),
        value("condition", "target condition number of AᵀA for synthetic data"),
        value("data-seed", "synthetic data seed [default: 0]"),
        value("noise", "synthetic label noise [default: 0.1]"),
    ]
}

fn problem_args() -> Vec<Arg> {
    let mut args = data_args();
    args.extend([
        value("loss", "squared, logistic or hinge [default: squared]"),
        value("lambda", "ridge weight, or auto for 1/(100n) [default: auto]"),
        value("problem", "primal, or dual (hinge loss only) [default: primal]"),
        value("cache-dir", "directory of cached optimal values [default: .momcomp-cache]"),
    ]);
    args
}

fn solver_args() -> Vec<Arg> {
    let mut args = problem_args();
    args.extend([
        value("algo", "aagd, aascd, aasvrg, agd, apcg, svrg, asvrg or sgd"),
        value("regime", "momentum schedule: nc, or sc for strongly convex h [default: nc]"),
        value("threads", "worker threads for the shared-memory runtime"),
        value("mode", "runtime scheme: atom or wild [default: atom]"),
        switch("order-queue", "apply runtime updates in iteration order"),
        value("iters", "iterations for step methods [default: 1000]"),
        value("epochs", "epochs for variance-reduced methods [default: 30]"),
        value("gamma", "step size; the theoretical rule is used when absent"),
        value("seed", "sampling and delay seed [default: 0]"),
        value("record-every", "trace record interval in steps or epochs"),
        value("grad-mode", "AASVRG compensation: exact or hvp [default: exact]"),
        value("sigma0", "SGD decaying step parameter; constant step when absent"),
        value("delay-log", "write runtime (k, j) pairs to this binary file"),
        value("out", "output CSV; standard output when absent"),
    ]);
    args
}

fn cli() -> Command {
    Command::new("momcomp")
        .about("Momentum-compensated asynchronous first-order methods")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("run")
                .about("Run one solver and write its trace as CSV")
                .args(solver_args())
                .args([
                    value("tau", "simulated delay bound"),
                    value("delay", "simulated delay model: fixed, uniform or serial"),
                    switch("wall-clock", "timestamp simulator records"),
                    switch("no-fstar", "skip the optimal value; residuals are NaN"),
                ]),
        )
        .subcommand(
            Command::new("fstar")
                .about("Compute or look up the cached optimal value")
                .args(problem_args()),
        )
        .subcommand(
            Command::new("speedup")
                .about("Measure runtime speedups over the one-thread run")
                .args(solver_args())
                .args([
                    value("threads-list", "comma-separated thread counts [default: 1,2,4]"),
                    value("target", "residual every run must reach [default: 1e-6]"),
                ]),
        )
        .subcommand(
            Command::new("synth")
                .about("Write a synthetic LIBSVM dataset")
                .args(data_args())
                .args([
                    value("task", "regression or classification [default: regression]"),
                    value("out", "output LIBSVM file").required(true),
                ]),
        )
}

/// Config file first, then every flag given on the command line.
fn settings(m: &ArgMatches) -> Result<Settings> {
    let mut s = match m.get_one::<String>("config") {
        Some(path) => Settings::load(path.as_ref())?,
        None => Settings::default(),
    };
    let mut flags = Settings::default();
    for id in m.ids() {
        let id = id.as_str();
        if id == "config" || m.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        if let Ok(Some(on)) = m.try_get_one::<bool>(id) {
            flags.set(id, on);
        } else if let Some(v) = m.get_one::<String>(id) {
            flags.set(id, v);
        }
    }
    s.overlay(flags);
    Ok(s)
}

fn dispatch(m: &ArgMatches) -> Result<()> {
    let (name, sub) = m.subcommand().expect("subcommand is required");
    let s = settings(sub)?;
    match name {
        "run" => commands::run(&s),
        "fstar" => commands::fstar(&s),
        "speedup" => commands::speedup(&s),
        "synth" => commands::synth(&s),
        other => unreachable!("unknown subcommand {other}"),
    }
}

/// The error chain joined by `: `, skipping causes already quoted by their parent.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let matches = cli().get_matches();
    match dispatch(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = exit::category(&e);
            eprintln!("error ({kind}): {}", message(&e));
            ExitCode::from(code)
        }
    }
}
