use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::solvers::Trace;

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub threads: usize,
    /// Total updates applied when the target was first recorded.
    pub iters: u64,
    pub seconds: f64,
    /// (serial iters / parallel iters) × P.
    pub iter_speedup: f64,
    /// Serial seconds / parallel seconds.
    pub time_speedup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupReport {
    pub target: f64,
    pub serial_iters: u64,
    pub serial_seconds: f64,
    pub rows: Vec<SpeedupRow>,
}

impl SpeedupReport {
    /// Wall-clock ratios depend on the machine; iteration ratios do not.
    pub const TIME_IS_HARDWARE_DEPENDENT: bool = true;

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["threads", "iters", "seconds", "iter_speedup", "time_speedup"])?;
        for r in &self.rows {
            wr.write_record(&[
                r.threads.to_string(),
                r.iters.to_string(),
                format!("{:e}", r.seconds),
                format!("{:e}", r.iter_speedup),
                format!("{:e}", r.time_speedup),
            ])?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads back the rows written by [`write_csv`](Self::write_csv).
    pub fn read_rows<R: Read>(r: R) -> Result<Vec<SpeedupRow>> {
        let mut rd = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let bad = |msg: String| Error::Parse { line: i + 2, msg };
            let field = |c: usize| rec.get(c).ok_or_else(|| bad(format!("missing column {c}")));
            let num = |c: usize| -> Result<f64> {
                field(c)?.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))
            };
            let int = |c: usize| -> Result<u64> {
                field(c)?.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))
            };
            rows.push(SpeedupRow {
                threads: int(0)? as usize,
                iters: int(1)?,
                seconds: num(2)?,
                iter_speedup: num(3)?,
                time_speedup: num(4)?,
            });
        }
        Ok(rows)
    }
}

fn reach(trace: &Trace, target: f64, run: &str) -> Result<(u64, f64)> {
    trace
        .first_reaching(target)
        .map(|r| (r.step, r.seconds))
        .ok_or_else(|| Error::TargetUnreached {
            run: run.to_string(),
            target,
        })
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == den {
        1.0
    } else {
        num / den
    }
}

/// Iteration and time speedups of parallel runs over a serial run, measured
/// at the first record reaching `target`.
pub fn speedup(serial: &Trace, parallel: &[(usize, Trace)], target: f64) -> Result<SpeedupReport> {
    let (serial_iters, serial_seconds) = reach(serial, target, "serial run")?;
    let mut rows = Vec::with_capacity(parallel.len());
    for (p, trace) in parallel {
        if *p == 0 {
            return Err(Error::invalid("thread count must be at least 1"));
        }
        let (iters, seconds) = reach(trace, target, &format!("parallel run with P={p}"))?;
        rows.push(SpeedupRow {
            threads: *p,
            iters,
            seconds,
            iter_speedup: ratio(serial_iters as f64, iters as f64) * *p as f64,
            time_speedup: ratio(serial_seconds, seconds),
        });
    }
    Ok(SpeedupReport {
        target,
        serial_iters,
        serial_seconds,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::TraceRecord;

    fn trace(points: &[(u64, f64, f64)]) -> Trace {
        Trace {
            records: points
                .iter()
                .map(|&(step, seconds, residual)| TraceRecord {
                    step,
                    seconds,
                    objective: residual,
                    residual,
                    grad_evals: step,
                })
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn formula() {
        let s = trace(&[(100, 2.0, 1e-2), (200, 4.0, 1e-4)]);
        let same = trace(&[(100, 1.0, 1e-2), (200, 1.0, 1e-4)]);
        let slow = trace(&[(200, 1.0, 1e-2), (400, 2.0, 1e-4)]);
        let r = speedup(&s, &[(1, s.clone()), (4, same), (4, slow)], 1e-4).unwrap();
        assert_eq!(r.serial_iters, 200);
        assert_eq!((r.rows[0].iter_speedup, r.rows[0].time_speedup), (1.0, 1.0));
        assert_eq!((r.rows[1].iter_speedup, r.rows[1].time_speedup), (4.0, 4.0));
        assert_eq!(r.rows[2].iter_speedup, 2.0);
    }

    #[test]
    fn unreached_names_run() {
        let s = trace(&[(100, 0.0, 1e-5)]);
        let bad = trace(&[(100, 0.0, 1e-2)]);
        let e = speedup(&s, &[(2, bad.clone())], 1e-4).unwrap_err().to_string();
        assert!(e.contains("P=2"), "{e}");
        assert!(speedup(&bad, &[], 1e-4).unwrap_err().to_string().contains("serial"));
    }
}
