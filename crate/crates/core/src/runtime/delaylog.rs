use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Observed delays k − j(k) of a parallel run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DelayHistogram {
    /// `counts[d]` updates were computed from a state d steps old.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl DelayHistogram {
    /// Empirical τ.
    pub fn max(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let s: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(d, &c)| d as f64 * c as f64)
            .sum();
        s / self.total as f64
    }
}

/// Histogram of k − j over logged (k, j) pairs; reads newer than their slot
/// count as delay 0.
pub fn measure_delay(log: &[(u64, u64)]) -> DelayHistogram {
    let mut h = DelayHistogram::default();
    for &(k, j) in log {
        let d = k.saturating_sub(j) as usize;
        if h.counts.len() <= d {
            h.counts.resize(d + 1, 0);
        }
        h.counts[d] += 1;
        h.total += 1;
    }
    h
}

/// Writes (k, j) pairs as consecutive little-endian u64 values.
pub fn write_delay_log<W: Write>(mut w: W, log: &[(u64, u64)]) -> std::io::Result<()> {
    for &(k, j) in log {
        w.write_all(&k.to_le_bytes())?;
        w.write_all(&j.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_delay_log<R: Read>(mut r: R) -> Result<Vec<(u64, u64)>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)
        .map_err(|e| Error::io("<delay log>", e))?;
    if buf.len() % 16 != 0 {
        return Err(Error::Parse {
            line: 0,
            msg: format!("delay log length {} is not a multiple of 16 bytes", buf.len()),
        });
    }
    let word = |b: &[u8]| u64::from_le_bytes(b.try_into().expect("8-byte chunk"));
    Ok(buf
        .chunks_exact(16)
        .map(|c| (word(&c[..8]), word(&c[8..])))
        .collect())
}

pub fn save_delay_log(path: impl AsRef<Path>, log: &[(u64, u64)]) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_delay_log(std::io::BufWriter::new(f), log).map_err(|e| Error::io(path, e))
}

pub fn load_delay_log(path: impl AsRef<Path>) -> Result<Vec<(u64, u64)>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_delay_log(f)
}
