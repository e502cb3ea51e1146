use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::problem::CompositeProblem;

/// Residuals below this are written as the floor value.
pub const RESIDUAL_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    pub seconds: f64,
    pub objective: f64,
    /// F(x) − F*, or NaN when F* is unknown.
    pub residual: f64,
    pub grad_evals: u64,
}

/// Progress of one solver run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    /// Final primal iterate.
    pub final_x: Vec<f64>,
    /// Every iterate, when requested.
    pub iterates: Vec<Vec<f64>>,
    /// Epoch snapshots x̃¹, x̃², … of the variance-reduced methods, when iterates are kept.
    pub snapshots: Vec<Vec<f64>>,
}

impl Trace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_residual(&self) -> f64 {
        self.last().map_or(f64::NAN, |r| r.residual)
    }

    /// First record whose residual is at or below `target`.
    pub fn first_reaching(&self, target: f64) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.residual <= target)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["step", "seconds", "objective", "residual", "grad_evals"])?;
        for r in &self.records {
            let res = if r.residual.is_nan() {
                r.residual
            } else {
                r.residual.max(RESIDUAL_FLOOR)
            };
            wr.write_record(&[
                r.step.to_string(),
                format!("{:e}", r.seconds),
                format!("{:e}", r.objective),
                format!("{:e}", res),
                r.grad_evals.to_string(),
            ])?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut records = Vec::new();
        for (i, row) in rd.records().enumerate() {
            let row = row?;
            let field = |c: usize| -> Result<&str> {
                row.get(c).ok_or_else(|| Error::Parse {
                    line: i + 2,
                    msg: format!("missing column {c}"),
                })
            };
            let num = |c: usize| -> Result<f64> {
                field(c)?.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 2,
                    msg: e.to_string(),
                })
            };
            let int = |c: usize| -> Result<u64> {
                field(c)?.parse::<u64>().map_err(|e| Error::Parse {
                    line: i + 2,
                    msg: e.to_string(),
                })
            };
            records.push(TraceRecord {
                step: int(0)?,
                seconds: num(1)?,
                objective: num(2)?,
                residual: num(3)?,
                grad_evals: int(4)?,
            });
        }
        Ok(Trace {
            records,
            ..Default::default()
        })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f)
    }
}

/// Options shared by every solver loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Step size γ (η₀ for the SGD baseline).
    pub gamma: f64,
    /// Iterations, or epochs for the variance-reduced methods.
    pub iters: usize,
    pub seed: u64,
    /// Record every this many steps; 0 records only the final state.
    pub record_every: usize,
    pub f_star: Option<f64>,
    pub keep_iterates: bool,
    /// Timestamp records; otherwise `seconds` is 0 so traces are reproducible.
    pub wall_clock: bool,
    /// Starting point; zero when absent.
    pub x0: Option<Vec<f64>>,
}

impl SolverOptions {
    pub fn new(gamma: f64, iters: usize) -> Self {
        Self {
            gamma,
            iters,
            seed: 0,
            record_every: 1,
            f_star: None,
            keep_iterates: false,
            wall_clock: false,
            x0: None,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    pub fn keep_iterates(mut self) -> Self {
        self.keep_iterates = true;
        self
    }

    pub fn wall_clock(mut self, on: bool) -> Self {
        self.wall_clock = on;
        self
    }

    pub fn x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub(crate) fn validate(&self, problem: &CompositeProblem) -> Result<Vec<f64>> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::invalid(format!("step size {} must be positive", self.gamma)));
        }
        let x0 = self.x0.clone().unwrap_or_else(|| vec![0.0; problem.dim()]);
        if x0.len() != problem.dim() {
            return Err(Error::invalid("starting point has the wrong dimension"));
        }
        if !problem.nonsmooth().is_feasible(&x0) {
            return Err(Error::invalid("starting point lies outside the domain of h"));
        }
        Ok(x0)
    }
}

/// Collects trace records as a solver runs.
pub(crate) struct Recorder<'a> {
    problem: &'a CompositeProblem,
    opts: &'a SolverOptions,
    start: Instant,
    trace: Trace,
    pub grad_evals: u64,
}

impl<'a> Recorder<'a> {
    pub fn new(problem: &'a CompositeProblem, opts: &'a SolverOptions) -> Self {
        Self {
            problem,
            opts,
            start: Instant::now(),
            trace: Trace::default(),
            grad_evals: 0,
        }
    }

    /// Whether step `step` (1-based count of completed steps) is recorded.
    #[inline]
    pub fn due(&self, step: usize, last: usize) -> bool {
        step == last || (self.opts.record_every > 0 && step % self.opts.record_every == 0)
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.trace.records.last()
    }

    pub fn keeps_iterates(&self) -> bool {
        self.opts.keep_iterates
    }

    pub fn push_iterate(&mut self, x: &[f64]) {
        if self.opts.keep_iterates {
            self.trace.iterates.push(x.to_vec());
        }
    }

    pub fn push_snapshot(&mut self, x: &[f64]) {
        if self.opts.keep_iterates {
            self.trace.snapshots.push(x.to_vec());
        }
    }

    pub fn record(&mut self, step: usize, x: &[f64]) {
        let objective = self.problem.objective(x);
        self.record_value(step, objective);
    }

    pub fn record_value(&mut self, step: usize, objective: f64) {
        let seconds = if self.opts.wall_clock {
            self.start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let residual = self.opts.f_star.map_or(f64::NAN, |f| objective - f);
        self.trace.records.push(TraceRecord {
            step: step as u64,
            seconds,
            objective,
            residual,
            grad_evals: self.grad_evals,
        });
    }

    pub fn finish(mut self, x: Vec<f64>) -> Trace {
        self.trace.final_x = x;
        self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_with_floor() {
        let t = Trace {
            records: vec![
                TraceRecord {
                    step: 1,
                    seconds: 0.0,
                    objective: 1.5,
                    residual: 0.25,
                    grad_evals: 10,
                },
                TraceRecord {
                    step: 2,
                    seconds: 0.0,
                    objective: 1.25,
                    residual: -1e-18,
                    grad_evals: 20,
                },
            ],
            ..Default::default()
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("step,seconds,objective,residual,grad_evals\n"));
        let back = Trace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.records[0], t.records[0]);
        assert_eq!(back.records[1].residual, RESIDUAL_FLOOR);
    }
}
