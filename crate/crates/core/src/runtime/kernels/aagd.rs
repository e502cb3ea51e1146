use crate::error::{Error, Result};
use crate::momentum::ThetaSchedule;
use crate::problem::CompositeProblem;
use crate::runtime::atomic::SharedVec;
use crate::runtime::shared::Mode;
use crate::solvers::SolverOptions;

use super::{DChain, Kernel, SharedScale};

/// AAGD in (u, v, d) form: x = u + d·v, z = u.
pub(crate) struct AagdKernel<'a> {
    problem: &'a CompositeProblem,
    theta: &'a ThetaSchedule,
    gamma: f64,
    mode: Mode,
    ordered: bool,
    /// Evaluate ∇f(u) + d·∇f_lin(v) instead of ∇f(u + d·v).
    split: bool,
    u: SharedVec,
    v: SharedVec,
    scale: SharedScale,
    chain: DChain,
}

pub(crate) enum AagdRead {
    Point(Vec<f64>),
    Split { u: Vec<f64>, v: Vec<f64>, c: f64 },
}

impl<'a> AagdKernel<'a> {
    pub fn new(
        problem: &'a CompositeProblem,
        theta: &'a ThetaSchedule,
        opts: &SolverOptions,
        mode: Mode,
        ordered: bool,
    ) -> Result<Self> {
        let x0 = opts.validate(problem)?;
        let quadratic = problem.smooth().is_quadratic();
        if mode == Mode::Wild {
            if !quadratic && !ordered {
                return Err(Error::Unsupported(
                    "AAGD in wild mode needs a quadratic smooth part (gradient split) \
                     or the update-order queue"
                        .into(),
                ));
            }
            if !problem.nonsmooth().is_separable() {
                return Err(Error::Unsupported(
                    "wild mode applies coordinate-wise proximal steps and needs a separable regularizer"
                        .into(),
                ));
            }
        }
        Ok(Self {
            problem,
            theta,
            gamma: opts.gamma,
            mode,
            ordered,
            split: mode == Mode::Wild && quadratic,
            v: SharedVec::zeros(x0.len()),
            u: SharedVec::from_slice(&x0),
            scale: SharedScale::default(),
            chain: DChain::new(),
        })
    }
}

impl Kernel for AagdKernel<'_> {
    type Read = AagdRead;
    type Update = Vec<f64>;

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

    fn read(&self, k: usize, _j: usize) -> Result<AagdRead> {
        let c = self.scale.get().weight(self.chain.next(k));
        if self.split {
            return Ok(AagdRead::Split {
                u: self.u.to_vec(),
                v: self.v.to_vec(),
                c,
            });
        }
        let w = (0..self.u.len())
            .map(|i| self.u.get(i) + c * self.v.get(i))
            .collect();
        Ok(AagdRead::Point(w))
    }

    fn compute(&self, _k: usize, read: AagdRead) -> Result<Vec<f64>> {
        match read {
            AagdRead::Point(w) => Ok(self.problem.full_grad(&w)),
            AagdRead::Split { u, v, c } => {
                let mut g = self.problem.full_grad(&u);
                let lin = self.problem.smooth().linear_grad(&v)?;
                for (gi, li) in g.iter_mut().zip(&lin) {
                    *gi += c * li;
                }
                Ok(g)
            }
        }
    }

    fn apply(&self, k: usize, _slot: usize, g: Vec<f64>) -> Result<()> {
        let t = self.theta.theta(k as i64);
        let weight = t / self.gamma;
        let dn = self.chain.next(k);
        let mut scale = self.scale.get();
        let inv = if dn.is_zero() {
            0.0
        } else {
            scale.inv_weight(self.chain.cur(k))
        };
        let h = self.problem.nonsmooth();
        match self.mode {
            Mode::Atom => {
                let z = self.u.to_vec();
                let mut delta = vec![0.0; z.len()];
                h.prox_full_into(&z, &g, weight, &mut delta);
                for (i, &di) in delta.iter().enumerate() {
                    self.u.add(i, di);
                }
                if !dn.is_zero() {
                    for (i, &di) in delta.iter().enumerate() {
                        self.v.add(i, -inv * di);
                    }
                }
            }
            Mode::Wild => {
                for (i, &gi) in g.iter().enumerate() {
                    let di = h.prox_coord(i, self.u.get(i), gi, weight)?;
                    self.u.add(i, di);
                    if !dn.is_zero() {
                        self.v.add(i, -inv * di);
                    }
                }
            }
        }
        if dn.is_zero() {
            // θ = 1 collapses x onto z; the step runs alone in its block
            // unless updates are applied strictly in order.
            self.v.fill(0.0);
            self.scale.set(Default::default());
        } else if self.mode == Mode::Atom {
            if let Some(f) = scale.rebase(dn) {
                self.v.scale(f);
                self.scale.set(scale);
            }
        }
        Ok(())
    }

    fn x(&self) -> Vec<f64> {
        let c = self.scale.get().weight(self.chain.d());
        (0..self.u.len())
            .map(|i| self.u.get(i) + c * self.v.get(i))
            .collect()
    }

    fn evals(&self, start: usize, end: usize) -> u64 {
        ((end - start) * self.problem.n_components()) as u64
    }

    fn state(&self) -> Vec<f64> {
        let mut s = self.u.to_vec();
        s.extend(self.v.to_vec());
        s
    }
}
