//! Per-algorithm step logic for the parallel engine.

mod aagd;
mod aascd;
mod svrg;
mod sgd;

pub(crate) use aagd::AagdKernel;
pub(crate) use aascd::AascdKernel;
pub(crate) use sgd::SgdKernel;
pub(crate) use svrg::{AasvrgKernel, AsvrgKernel};

use std::sync::atomic::{AtomicI64, Ordering};

use crate::error::Result;
use crate::momentum::{ScaledScalar, ThetaSchedule};
use crate::solvers::UvScale;

/// One algorithm as seen by the engine: read state, compute an update from
/// it, apply the update. `read` and `apply` run inside the global section in
/// atom mode; `compute` never does.
pub(crate) trait Kernel: Sync {
    type Read: Send;
    type Update: Send;

    /// Sets up steps `start..` and returns where the block ends, at most
    /// `limit` and more than `start`. Runs with every worker stopped.
    fn prepare(&mut self, start: usize, limit: usize) -> Result<usize>;

    /// Reads the state for step `k`; `j` updates have been applied so far.
    fn read(&self, k: usize, j: usize) -> Result<Self::Read>;

    fn compute(&self, k: usize, read: Self::Read) -> Result<Self::Update>;

    /// Applies step `k`'s update as the `slot`-th update overall.
    fn apply(&self, k: usize, slot: usize, update: Self::Update) -> Result<()>;

    /// Runs with every worker stopped after steps `..end`.
    fn finish(&mut self, _end: usize) -> Result<()> {
        Ok(())
    }

    /// Current primal iterate.
    fn x(&self) -> Vec<f64>;

    /// Gradient evaluations charged to steps `start..end`.
    fn evals(&self, start: usize, end: usize) -> u64;

    /// Full parameter state, for read logging.
    fn state(&self) -> Vec<f64>;
}

/// Largest binary gap between the v scale and d allowed inside a wild block.
const WILD_GAP: i64 = 900;

/// The momentum weights dᵏ of one block, chained exactly as the serial loops
/// chain them. Both dᵏ and the unreset (1 − θᵏ)dᵏ are kept.
#[derive(Debug, Clone)]
pub(crate) struct DChain {
    d: ScaledScalar,
    start: usize,
    cur: Vec<ScaledScalar>,
    next: Vec<ScaledScalar>,
}

impl DChain {
    pub fn new() -> Self {
        Self {
            d: ScaledScalar::ONE,
            start: 0,
            cur: Vec::new(),
            next: Vec::new(),
        }
    }

    /// d after the last prepared step.
    pub fn d(&self) -> ScaledScalar {
        self.d
    }

    #[inline]
    pub fn cur(&self, k: usize) -> ScaledScalar {
        self.cur[k - self.start]
    }

    #[inline]
    pub fn next(&self, k: usize) -> ScaledScalar {
        self.next[k - self.start]
    }

    /// Chains steps `start..limit`. With `isolate`, a reset step (θ = 1) gets a
    /// block of its own. With `exp`, the block also stops before d falls too far
    /// below the v scale 2^exp.
    pub fn prepare(
        &mut self,
        theta: &ThetaSchedule,
        start: usize,
        limit: usize,
        isolate: bool,
        exp: Option<i64>,
    ) -> usize {
        self.start = start;
        self.cur.clear();
        self.next.clear();
        let mut d = self.d;
        for k in start..limit {
            let dn = d.scaled_mul(1.0 - theta.theta(k as i64));
            let first = k == start;
            if !first && isolate && dn.is_zero() {
                break;
            }
            if !first && exp.is_some_and(|e| e - dn.exponent() > WILD_GAP) {
                break;
            }
            self.cur.push(d);
            self.next.push(dn);
            d = if dn.is_zero() { ScaledScalar::ONE } else { dn };
            if isolate && dn.is_zero() {
                break;
            }
        }
        self.d = d;
        start + self.cur.len()
    }
}

/// v scale exponent shared between workers.
#[derive(Debug, Default)]
pub(crate) struct SharedScale(AtomicI64);

impl SharedScale {
    #[inline]
    pub fn get(&self) -> UvScale {
        UvScale::from_exponent(self.0.load(Ordering::Relaxed))
    }

    #[inline]
    pub fn set(&self, s: UvScale) {
        self.0.store(s.exponent(), Ordering::Relaxed);
    }
}
