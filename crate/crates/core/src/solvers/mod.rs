//! Deterministic solver loops driven by a delay schedule.

mod aascd;
mod aasvrg;
mod agd;
mod baselines;
mod fstar;
mod history;
mod trace;
mod uv;

pub use aascd::{coordinate_stream, dual_gap, run_aascd, run_aascd_naive_with, run_apcg, AascdForm};
pub use aasvrg::{
    component_stream, run_aasvrg, run_accelerated_svrg, snapshot_update, AasvrgOptions, GradMode,
    ScWeights, SnapshotRule,
};
pub use agd::{run_aagd, run_aagd_math_with, run_agd, AagdForm};
pub use baselines::{run_asvrg_baseline, run_sgd_baseline, StepRule};
pub use fstar::{compute_fstar, FStar, FSTAR_MAX_ITERS, FSTAR_TOL};
pub use trace::{SolverOptions, Trace, TraceRecord, RESIDUAL_FLOOR};
pub use uv::UvScale;

pub(crate) use aascd::check_separable;
pub(crate) use aasvrg::{check_regime, inner_len, snapshot_rule, SnapshotSum};
pub(crate) use trace::Recorder;
