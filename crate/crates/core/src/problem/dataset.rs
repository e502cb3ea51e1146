use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::CsrMatrix;

/// Labelled sparse design matrix; one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: CsrMatrix,
    pub labels: Vec<f64>,
    pub normalized: bool,
}

impl Dataset {
    pub fn new(features: CsrMatrix, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::invalid(format!(
                "{} labels for {} rows",
                labels.len(),
                features.rows()
            )));
        }
        if labels.iter().any(|l| !l.is_finite()) {
            return Err(Error::invalid("non-finite label"));
        }
        Ok(Self {
            features,
            labels,
            normalized: false,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// Rescales every nonzero row to unit Euclidean norm; zero rows stay zero.
    pub fn normalize_rows(&mut self) {
        for r in 0..self.features.rows() {
            let n = self.features.row_sq_norm(r).sqrt();
            if n > 0.0 {
                self.features.scale_row(r, 1.0 / n);
            }
        }
        self.normalized = true;
    }

    /// Serializes in LIBSVM text format (1-based indices).
    pub fn to_libsvm(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n_samples() {
            write!(out, "{}", fmt_num(self.labels[r])).unwrap();
            let (idx, vals) = self.features.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                write!(out, " {}:{}", c + 1, fmt_num(v)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_libsvm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_libsvm()).map_err(|e| Error::io(path, e))
    }
}

fn fmt_num(v: f64) -> String {
    // shortest representation that round-trips
    let s = format!("{v}");
    if s.parse::<f64>().ok() == Some(v) {
        s
    } else {
        format!("{v:e}")
    }
}

/// Parses LIBSVM text: `label idx:val idx:val ...`, 1-based strictly
/// increasing indices. Blank lines and `#` comments are skipped.
pub fn parse_libsvm(text: &str, normalize: bool) -> Result<Dataset> {
    let mut row_ptr = vec![0usize];
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    let mut labels = Vec::new();
    let mut max_col = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad label {label_tok:?}"),
        })?;
        let mut last: Option<usize> = None;
        for tok in tokens {
            let (i, v) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected idx:val, got {tok:?}"),
            })?;
            let idx: usize = i.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad index {i:?}"),
            })?;
            let val: f64 = v.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad value {v:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "indices are 1-based".into(),
                });
            }
            if !val.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite value {v:?}"),
                });
            }
            if last.is_some_and(|l| idx <= l) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "indices must be strictly increasing".into(),
                });
            }
            last = Some(idx);
            max_col = max_col.max(idx);
            col_idx.push(idx - 1);
            vals.push(val);
        }
        labels.push(label);
        row_ptr.push(col_idx.len());
    }
    if labels.is_empty() {
        return Err(Error::Empty("LIBSVM input has no samples".into()));
    }
    let features = CsrMatrix::new(labels.len(), max_col, row_ptr, col_idx, vals)?;
    let mut data = Dataset::new(features, labels)?;
    if normalize {
        data.normalize_rows();
    }
    Ok(data)
}

pub fn load_libsvm(path: impl AsRef<Path>, normalize: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(&text, normalize)
}
