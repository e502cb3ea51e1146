use crate::delay::CounterStream;
use crate::error::{Error, Result};
use crate::problem::CompositeProblem;
use crate::runtime::atomic::SharedVec;
use crate::runtime::shared::Mode;
use crate::solvers::{component_stream, SolverOptions, StepRule};

use super::Kernel;

/// Proximal SGD on a shared iterate (Hogwild-style in wild mode).
pub(crate) struct SgdKernel<'a> {
    problem: &'a CompositeProblem,
    rule: StepRule,
    eta0: f64,
    mode: Mode,
    comps: CounterStream,
    x: SharedVec,
}

impl<'a> SgdKernel<'a> {
    pub fn new(
        problem: &'a CompositeProblem,
        rule: StepRule,
        opts: &SolverOptions,
        mode: Mode,
    ) -> Result<Self> {
        if let StepRule::Decaying { sigma0 } = rule {
            if !(sigma0 > 0.0) {
                return Err(Error::invalid("decaying step needs sigma0 > 0"));
            }
        }
        if mode == Mode::Wild && !problem.nonsmooth().is_separable() {
            return Err(Error::Unsupported(
                "wild mode applies coordinate-wise proximal steps and needs a separable regularizer"
                    .into(),
            ));
        }
        let x = opts.validate(problem)?;
        Ok(Self {
            problem,
            rule,
            eta0: opts.gamma,
            mode,
            comps: component_stream(opts.seed),
            x: SharedVec::from_slice(&x),
        })
    }
}

impl Kernel for SgdKernel<'_> {
    /// Component and ∇f_i = c·M_i.
    type Read = (usize, f64);
    type Update = (usize, f64);

    fn prepare(&mut self, _start: usize, limit: usize) -> Result<usize> {
        Ok(limit)
    }

    fn read(&self, k: usize, _j: usize) -> Result<(usize, f64)> {
        let smooth = self.problem.smooth();
        let i = self.comps.index(k as u64, smooth.n_components());
        let (cols, vals) = smooth.matrix().row(i);
        let m: f64 = cols.iter().zip(vals).map(|(&c, &v)| v * self.x.get(c)).sum();
        let weight = smooth.n_components() as f64 * smooth.scale();
        Ok((i, weight * smooth.loss().deriv(m, smooth.targets()[i])))
    }

    fn compute(&self, _k: usize, read: (usize, f64)) -> Result<(usize, f64)> {
        Ok(read)
    }

    fn apply(&self, k: usize, _slot: usize, (i, c): (usize, f64)) -> Result<()> {
        let dim = self.x.len();
        let mut g = vec![0.0; dim];
        self.problem.smooth().add_row(i, c, &mut g);
        let weight = 1.0 / self.rule.step(self.eta0, k);
        let h = self.problem.nonsmooth();
        match self.mode {
            Mode::Atom => {
                let x = self.x.to_vec();
                let mut delta = vec![0.0; dim];
                h.prox_full_into(&x, &g, weight, &mut delta);
                for (e, &d) in delta.iter().enumerate() {
                    self.x.add(e, d);
                }
            }
            Mode::Wild => {
                for (e, &ge) in g.iter().enumerate() {
                    let d = h.prox_coord(e, self.x.get(e), ge, weight)?;
                    self.x.add(e, d);
                }
            }
        }
        Ok(())
    }

    fn x(&self) -> Vec<f64> {
        self.x.to_vec()
    }

    fn evals(&self, start: usize, end: usize) -> u64 {
        (end - start) as u64
    }

    fn state(&self) -> Vec<f64> {
        self.x.to_vec()
    }
}
