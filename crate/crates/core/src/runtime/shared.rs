use std::sync::Arc;

use super::atomic::SharedVec;
use super::lock::{LockSet, LockTable, SpinGuard, SpinLock};

/// Concurrency scheme of a parallel run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Whole-state reads and writes are mutually exclusive: every read is a
    /// past iterate.
    Atom,
    /// No global lock. Coordinate writes are indivisible, full reads may be
    /// torn, and only the auxiliary products are kept lock-consistent.
    Wild,
}

impl std::str::FromStr for Mode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "atom" => Ok(Mode::Atom),
            "wild" => Ok(Mode::Wild),
            _ => Err(crate::error::Error::invalid(format!(
                "unknown mode {s:?} (expected atom or wild)"
            ))),
        }
    }
}

/// Parameter vector plus auxiliary products p = A·x kept alongside it.
#[derive(Debug)]
pub struct SharedState {
    params: SharedVec,
    products: SharedVec,
    coord_locks: LockTable,
    product_locks: LockTable,
    global: Arc<SpinLock>,
    mode: Mode,
}

/// Locks held for one coordinate update in wild mode.
#[must_use]
#[derive(Debug)]
pub struct CoordinateGuard<'a> {
    _coord: SpinGuard<'a>,
    _products: LockSet<'a>,
}

impl SharedState {
    pub fn new(params: &[f64], products: &[f64], mode: Mode) -> Self {
        Self::with_global(params, products, mode, Arc::new(SpinLock::new()))
    }

    /// State whose atom section is shared with other states.
    pub fn with_global(params: &[f64], products: &[f64], mode: Mode, global: Arc<SpinLock>) -> Self {
        Self {
            params: SharedVec::from_slice(params),
            products: SharedVec::from_slice(products),
            coord_locks: LockTable::new(params.len()),
            product_locks: LockTable::new(products.len()),
            global,
            mode,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn params(&self) -> &SharedVec {
        &self.params
    }

    pub fn products(&self) -> &SharedVec {
        &self.products
    }

    pub fn global(&self) -> &SpinLock {
        &self.global
    }

    /// Takes coordinate `i`'s lock, then the product locks of `rows` in
    /// ascending order.
    pub fn lock_coordinate(&self, i: usize, rows: &[usize]) -> CoordinateGuard<'_> {
        CoordinateGuard {
            _coord: self.coord_locks.lock(i),
            _products: self.product_locks.lock_set(rows),
        }
    }

    /// `x_i += δ` and `p_r += coeffs[r]·δ` for every touched row, under the
    /// global section (atom) or the coordinate and row locks (wild).
    pub fn apply_coordinate_delta(&self, i: usize, delta: f64, rows: &[usize], coeffs: &[f64]) {
        debug_assert!(delta.is_finite());
        match self.mode {
            Mode::Atom => {
                let _g = self.global.lock();
                self.apply_held(i, delta, rows, coeffs);
            }
            Mode::Wild => {
                let _g = self.lock_coordinate(i, rows);
                self.apply_held(i, delta, rows, coeffs);
            }
        }
    }

    /// The update itself; the caller holds whatever locks the mode needs.
    #[inline]
    pub fn apply_held(&self, i: usize, delta: f64, rows: &[usize], coeffs: &[f64]) {
        self.params.add(i, delta);
        for (&r, &m) in rows.iter().zip(coeffs) {
            self.products.add(r, delta * m);
        }
    }

    /// Zeroes parameters and products. Callers must have exclusive access.
    pub(crate) fn clear(&self) {
        self.params.fill(0.0);
        self.products.fill(0.0);
    }

    /// Scales parameters and products. Callers must have exclusive access.
    pub(crate) fn scale(&self, f: f64) {
        self.params.scale(f);
        self.products.scale(f);
    }
}
