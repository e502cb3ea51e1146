//! Data, objectives, gradients, proximal maps and smoothness constants.

mod composite;
mod csr;
mod dataset;
mod dual;
mod erm;
mod loss;
mod nonsmooth;
mod smooth;
pub mod synth;

pub use composite::{estimate_constants, vr_grad, CompositeProblem, Constants, Snapshot};
pub use csr::CsrMatrix;
pub use dataset::{load_libsvm, parse_libsvm, Dataset};
pub use dual::{make_dual_svm, DualSvmProblem};
pub use erm::{make_erm, Regularizer};
pub use loss::Loss;
pub use nonsmooth::{prox_step, Coords, NonsmoothPart};
pub use smooth::SmoothPart;
