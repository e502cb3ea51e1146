//! Momentum-compensated asynchronous first-order methods.
//!
//! The crate is split into:
//!
//! * [`problem`]: sparse data, ERM objectives, gradients, proximal maps and
//!   smoothness constants.
//! * [`momentum`]: θ schedules, compensation coefficients, step-size rules and
//!   the scaled scalar used to store the decaying momentum weight.
//! * [`delay`]: deterministic bounded-delay schedules and overlap statistics.
//! * [`solvers`]: single-threaded solver loops driven by a delay schedule.
//! * [`runtime`]: real shared-memory execution with atom and wild schemes.

pub mod delay;
pub mod error;
pub mod linalg;
pub mod momentum;
pub mod problem;
pub mod runtime;
pub mod solvers;

pub use error::{Error, Result};
