use std::sync::Arc;

use crate::delay::CounterStream;
use crate::error::Result;
use crate::momentum::ThetaSchedule;
use crate::problem::CompositeProblem;
use crate::runtime::lock::SpinLock;
use crate::runtime::shared::{Mode, SharedState};
use crate::solvers::{check_separable, coordinate_stream, SolverOptions};

use super::{DChain, Kernel, SharedScale};

/// AASCD in (u, v, d) form with products M·u and M·v kept next to u and v.
/// In wild mode both products are guarded by u's row locks.
pub(crate) struct AascdKernel<'a> {
    problem: &'a CompositeProblem,
    theta: &'a ThetaSchedule,
    gamma: f64,
    mode: Mode,
    ordered: bool,
    coords: CounterStream,
    u: SharedState,
    v: SharedState,
    scale: SharedScale,
    chain: DChain,
}

impl<'a> AascdKernel<'a> {
    pub fn new(
        problem: &'a CompositeProblem,
        theta: &'a ThetaSchedule,
        opts: &SolverOptions,
        mode: Mode,
        ordered: bool,
        global: Arc<SpinLock>,
    ) -> Result<Self> {
        check_separable(problem)?;
        let x0 = opts.validate(problem)?;
        let mat = problem.smooth().matrix();
        let pu = mat.mul_vec(&x0);
        let zeros = vec![0.0; x0.len()];
        let pv = vec![0.0; mat.rows()];
        Ok(Self {
            problem,
            theta,
            gamma: opts.gamma,
            mode,
            ordered,
            coords: coordinate_stream(opts.seed),
            u: SharedState::with_global(&x0, &pu, mode, global.clone()),
            v: SharedState::with_global(&zeros, &pv, mode, global),
            scale: SharedScale::default(),
            chain: DChain::new(),
        })
    }

    fn dim(&self) -> usize {
        self.problem.dim()
    }
}

impl Kernel for AascdKernel<'_> {
    /// Sampled coordinate and the margins of the rows it touches.
    type Read = (usize, Vec<f64>);
    type Update = (usize, f64);

    fn prepare(&mut self, start: usize, limit: usize) -> Result<usize> {
        let exact = self.mode == Mode::Atom && self.ordered;
        let mut exp = None;
        if self.mode == Mode::Wild {
            let mut s = self.scale.get();
            if let Some(f) = s.rebase(self.chain.d()) {
                self.v.scale(f);
                self.scale.set(s);
            }
            exp = Some(s.exponent());
        }
        Ok(self.chain.prepare(self.theta, start, limit, !exact, exp))
    }

    fn read(&self, k: usize, _j: usize) -> Result<(usize, Vec<f64>)> {
        let i = self.coords.index(k as u64, self.dim());
        let (rows, _) = self.problem.smooth().matrix_t().row(i);
        let c = self.scale.get().weight(self.chain.next(k));
        let (pu, pv) = (self.u.products(), self.v.products());
        let margins = rows.iter().map(|&r| pu.get(r) + c * pv.get(r)).collect();
        Ok((i, margins))
    }

    fn compute(&self, _k: usize, (i, margins): (usize, Vec<f64>)) -> Result<(usize, f64)> {
        let smooth = self.problem.smooth();
        let (loss, targets) = (smooth.loss(), smooth.targets());
        let (rows, vals) = smooth.matrix_t().row(i);
        let mut g = 0.0;
        for ((&r, &m), &mr) in rows.iter().zip(vals).zip(&margins) {
            g += m * loss.deriv(mr, targets[r]);
        }
        Ok((i, smooth.scale() * g))
    }

    fn apply(&self, k: usize, _slot: usize, (i, g): (usize, f64)) -> Result<()> {
        let n = self.dim() as f64;
        let t = self.theta.theta(k as i64);
        let dn = self.chain.next(k);
        let (rows, vals) = self.problem.smooth().matrix_t().row(i);
        let _locks = (self.mode == Mode::Wild).then(|| self.u.lock_coordinate(i, rows));
        let delta = self.problem.nonsmooth().prox_coord(
            i,
            self.u.params().get(i),
            g,
            n * t / self.gamma,
        )?;
        self.u.apply_held(i, delta, rows, vals);
        if dn.is_zero() {
            // Runs alone in its block unless updates are strictly ordered.
            self.v.clear();
            self.scale.set(Default::default());
            return Ok(());
        }
        let mut scale = self.scale.get();
        let dv = -(1.0 - n * t) * delta * scale.inv_weight(dn);
        self.v.apply_held(i, dv, rows, vals);
        if self.mode == Mode::Atom {
            if let Some(f) = scale.rebase(dn) {
                self.v.scale(f);
                self.scale.set(scale);
            }
        }
        Ok(())
    }

    fn x(&self) -> Vec<f64> {
        let c = self.scale.get().weight(self.chain.d());
        let (u, v) = (self.u.params(), self.v.params());
        (0..u.len()).map(|i| u.get(i) + c * v.get(i)).collect()
    }

    fn evals(&self, start: usize, end: usize) -> u64 {
        (end - start) as u64
    }

    fn state(&self) -> Vec<f64> {
        let mut s = self.u.params().to_vec();
        s.extend(self.v.params().to_vec());
        s
    }
}
