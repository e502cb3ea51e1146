//! On-disk cache of optimal values, keyed by a content hash of the problem.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use momcomp::solvers::{compute_fstar, FStar, FSTAR_MAX_ITERS, FSTAR_TOL};
use sha2::{Digest, Sha256};

use crate::setup::Built;

/// Hex SHA-256 over the data, loss, λ, problem form and solver tolerance.
pub fn content_key(b: &Built) -> String {
    let mut h = Sha256::new();
    let m = &b.data.features;
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    for &p in m.row_ptr() {
        h.update((p as u64).to_le_bytes());
    }
    for &c in m.col_idx() {
        h.update((c as u64).to_le_bytes());
    }
    for v in m.vals().iter().chain(&b.data.labels) {
        h.update(v.to_bits().to_le_bytes());
    }
    h.update(format!("{:?}", b.loss));
    h.update(b.lambda.to_bits().to_le_bytes());
    h.update([b.dual as u8]);
    h.update(FSTAR_TOL.to_bits().to_le_bytes());
    h.update((FSTAR_MAX_ITERS as u64).to_le_bytes());
    hex::encode(h.finalize())
}

pub fn path_for(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.fstar"))
}

fn encode(f: &FStar) -> String {
    let x: Vec<String> = f.x.iter().map(|v| format!("{v:e}")).collect();
    format!(
        "value={:e}\ngrad_map_norm={:e}\niters={}\nconverged={}\nx={}\n",
        f.value,
        f.grad_map_norm,
        f.iters,
        f.converged,
        x.join(",")
    )
}

fn decode(text: &str) -> Option<FStar> {
    let field = |k: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(k).and_then(|r| r.strip_prefix('=')))
    };
    let x = field("x")?;
    let x = if x.is_empty() {
        Vec::new()
    } else {
        x.split(',').map(str::parse).collect::<Result<_, _>>().ok()?
    };
    Some(FStar {
        value: field("value")?.parse().ok()?,
        grad_map_norm: field("grad_map_norm")?.parse().ok()?,
        iters: field("iters")?.parse().ok()?,
        converged: field("converged")?.parse().ok()?,
        x,
    })
}

pub struct Lookup {
    pub fstar: FStar,
    pub hit: bool,
    pub path: PathBuf,
}

/// Returns the cached optimum or computes and stores it. Unconverged results
/// are stored too and reported with a warning on every use.
pub fn fstar(b: &Built, dir: &Path) -> Result<Lookup> {
    let path = path_for(dir, &content_key(b));
    if let Ok(text) = fs::read_to_string(&path) {
        match decode(&text) {
            Some(f) if f.x.len() == b.problem.dim() => {
                warn_unconverged(&f);
                return Ok(Lookup {
                    fstar: f,
                    hit: true,
                    path,
                });
            }
            _ => log::warn!("ignoring malformed cache entry {}", path.display()),
        }
    }
    let f = compute_fstar(&b.problem, FSTAR_TOL, FSTAR_MAX_ITERS)?;
    warn_unconverged(&f);
    fs::create_dir_all(dir).with_context(|| format!("creating cache dir {}", dir.display()))?;
    fs::write(&path, encode(&f)).with_context(|| format!("writing {}", path.display()))?;
    Ok(Lookup {
        fstar: f,
        hit: false,
        path,
    })
}

fn warn_unconverged(f: &FStar) {
    if !f.converged {
        log::warn!(
            "optimal value not certified: gradient-map norm {:e} after {} iterations exceeds {:e}",
            f.grad_map_norm,
            f.iters,
            FSTAR_TOL
        );
    }
}
