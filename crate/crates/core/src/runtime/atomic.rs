use std::sync::atomic::{AtomicU64, Ordering};

/// An f64 held as its bit pattern; every operation is indivisible.
///
/// Accesses are relaxed: ordering between threads comes from the locks,
/// the update-order queue and the block joins.
#[derive(Debug, Default)]
pub struct AtomicF64(AtomicU64);

impl AtomicF64 {
    pub fn new(x: f64) -> Self {
        Self(AtomicU64::new(x.to_bits()))
    }

    #[inline]
    pub fn load(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    #[inline]
    pub fn store(&self, x: f64) {
        self.0.store(x.to_bits(), Ordering::Relaxed);
    }

    /// `self += delta`, returning the previous value.
    #[inline]
    pub fn fetch_add(&self, delta: f64) -> f64 {
        let mut cur = self.0.load(Ordering::Relaxed);
        loop {
            let next = (f64::from_bits(cur) + delta).to_bits();
            match self
                .0
                .compare_exchange_weak(cur, next, Ordering::Relaxed, Ordering::Relaxed)
            {
                Ok(_) => return f64::from_bits(cur),
                Err(seen) => cur = seen,
            }
        }
    }
}

/// Shared vector with coordinate-granular indivisible reads and writes.
#[derive(Debug)]
pub struct SharedVec(Box<[AtomicF64]>);

impl SharedVec {
    pub fn zeros(len: usize) -> Self {
        Self((0..len).map(|_| AtomicF64::new(0.0)).collect())
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self(x.iter().map(|&e| AtomicF64::new(e)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.0[i].load()
    }

    #[inline]
    pub fn set(&self, i: usize, x: f64) {
        self.0[i].store(x);
    }

    /// Indivisible `self[i] += delta`; returns the previous value.
    #[inline]
    pub fn add(&self, i: usize, delta: f64) -> f64 {
        self.0[i].fetch_add(delta)
    }

    /// Entry-by-entry copy; may be torn if writers are active.
    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().map(AtomicF64::load).collect()
    }

    pub fn fill(&self, x: f64) {
        self.0.iter().for_each(|e| e.store(x));
    }

    pub fn scale(&self, f: f64) {
        self.0.iter().for_each(|e| e.store(e.load() * f));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fetch_add_returns_previous() {
        let a = AtomicF64::new(1.5);
        assert_eq!(a.fetch_add(2.0), 1.5);
        assert_eq!(a.load(), 3.5);
        let v = SharedVec::from_slice(&[1.0, -2.0]);
        v.add(1, 0.5);
        v.scale(2.0);
        assert_eq!(v.to_vec(), vec![2.0, -3.0]);
    }
}
