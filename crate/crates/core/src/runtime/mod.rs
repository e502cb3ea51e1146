//! Shared-memory parallel execution.
//!
//! Workers share one parameter state. In atom mode every read and write of
//! the whole state happens inside one global section, so each read is a true
//! past iterate. In wild mode coordinates are written indivisibly with no
//! global lock and reads may mix iterates; only the auxiliary products are
//! guarded, by per-row spin locks taken in ascending order.

mod atomic;
mod delaylog;
mod engine;
mod kernels;
mod lock;
mod queue;
mod shared;
mod speedup;

pub use atomic::{AtomicF64, SharedVec};
pub use delaylog::{
    load_delay_log, measure_delay, read_delay_log, save_delay_log, write_delay_log, DelayHistogram,
};
pub use engine::{
    run_parallel, threads_from_env, ParallelAlgo, ParallelConfig, ParallelRun, THREADS_ENV,
};
pub use lock::{LockSet, LockTable, SpinGuard, SpinLock};
pub use queue::UpdateOrderQueue;
pub use shared::{CoordinateGuard, Mode, SharedState};
pub use speedup::{speedup, SpeedupReport, SpeedupRow};
