use std::path::Path;

use crate::error::{Error, Result};

use super::{CounterStream, StreamTag};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DelayKind {
    /// j(k) = k
    Serial,
    /// j(k) = max(0, k − τ)
    Fixed,
    /// j(k) uniform over {max(0, k − τ), …, k}
    UniformRandom,
    /// Explicit j(k) values; horizon is the list length.
    Trace(Vec<usize>),
}

/// Total map k ↦ j(k) on [0, horizon).
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySchedule {
    kind: DelayKind,
    tau: usize,
    horizon: usize,
    serial_warmup: bool,
    stream: CounterStream,
}

pub fn make_schedule(
    kind: DelayKind,
    tau: usize,
    horizon: usize,
    seed: u64,
    serial_warmup: bool,
) -> Result<DelaySchedule> {
    let horizon = match &kind {
        DelayKind::Trace(t) => t.len(),
        _ => horizon,
    };
    if horizon == 0 {
        return Err(Error::invalid("schedule horizon must be at least 1"));
    }
    let tau = if kind == DelayKind::Serial { 0 } else { tau };
    Ok(DelaySchedule {
        kind,
        tau,
        horizon,
        serial_warmup,
        stream: CounterStream::new(seed, StreamTag::Delay),
    })
}

impl DelaySchedule {
    pub fn serial(horizon: usize) -> Self {
        make_schedule(DelayKind::Serial, 0, horizon.max(1), 0, false)
            .expect("serial schedule is always valid")
    }

    pub fn kind(&self) -> &DelayKind {
        &self.kind
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn serial_warmup(&self) -> bool {
        self.serial_warmup
    }

    /// Delayed index for iteration k < horizon.
    pub fn j(&self, k: usize) -> usize {
        debug_assert!(k < self.horizon, "k={k} beyond horizon {}", self.horizon);
        if let DelayKind::Trace(t) = &self.kind {
            return t[k];
        }
        if self.serial_warmup && k < self.tau {
            return k;
        }
        match self.kind {
            DelayKind::Serial => k,
            DelayKind::Fixed => k.saturating_sub(self.tau),
            DelayKind::UniformRandom => {
                let width = self.tau.min(k) + 1;
                k - self.stream.index(k as u64, width)
            }
            DelayKind::Trace(_) => unreachable!(),
        }
    }

    /// Errors unless the schedule covers `steps` iterations.
    pub fn check_horizon(&self, steps: usize) -> Result<()> {
        if self.horizon < steps {
            Err(Error::invalid(format!(
                "schedule horizon {} shorter than the {} requested steps",
                self.horizon, steps
            )))
        } else {
            Ok(())
        }
    }
}

/// Result of checking j(k) ∈ {k − τ, …, k} for every k.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub max_delay: usize,
    /// histogram[d] = number of k with k − j(k) = d.
    pub histogram: Vec<u64>,
    pub violations: usize,
    /// First offending (k, j(k)).
    pub first_violation: Option<(usize, usize)>,
}

impl ScheduleReport {
    pub fn is_valid(&self) -> bool {
        self.violations == 0
    }

    pub fn mean_delay(&self) -> f64 {
        let total: u64 = self.histogram.iter().sum();
        let s: f64 = self
            .histogram
            .iter()
            .enumerate()
            .map(|(d, &c)| d as f64 * c as f64)
            .sum();
        s / total.max(1) as f64
    }
}

pub fn verify_schedule(s: &DelaySchedule) -> ScheduleReport {
    let mut histogram = vec![0u64; s.tau + 1];
    let mut max_delay = 0;
    let mut violations = 0;
    let mut first = None;
    for k in 0..s.horizon {
        let j = s.j(k);
        if j > k || k - j > s.tau {
            violations += 1;
            first.get_or_insert((k, j));
            continue;
        }
        let d = k - j;
        max_delay = max_delay.max(d);
        histogram[d] += 1;
    }
    ScheduleReport {
        max_delay,
        histogram,
        violations,
        first_violation: first,
    }
}

impl ScheduleReport {
    pub fn into_result(self, tau: usize) -> Result<Self> {
        match self.first_violation {
            Some((k, j)) => Err(Error::ScheduleViolation { k, j, tau }),
            None => Ok(self),
        }
    }
}

/// One non-negative integer per line; blank lines and `#` comments skipped.
pub fn parse_trace(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = line.parse::<usize>().map_err(|e| Error::Parse {
            line: no + 1,
            msg: format!("'{line}': {e}"),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Empty("delay trace has no entries".into()));
    }
    Ok(out)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text)
}
