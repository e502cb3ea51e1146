use std::hint;
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;

/// Spins before yielding the time slice.
const SPINS_BEFORE_YIELD: u32 = 64;

#[inline]
fn backoff(spins: &mut u32) {
    if *spins < SPINS_BEFORE_YIELD {
        hint::spin_loop();
        *spins += 1;
    } else {
        thread::yield_now();
    }
}

/// Busy-wait mutual exclusion.
#[derive(Debug, Default)]
pub struct SpinLock {
    held: AtomicBool,
}

impl SpinLock {
    pub const fn new() -> Self {
        Self {
            held: AtomicBool::new(false),
        }
    }

    pub fn lock(&self) -> SpinGuard<'_> {
        let mut spins = 0;
        loop {
            if let Some(g) = self.try_lock() {
                return g;
            }
            while self.held.load(Ordering::Relaxed) {
                backoff(&mut spins);
            }
        }
    }

    pub fn try_lock(&self) -> Option<SpinGuard<'_>> {
        self.held
            .compare_exchange_weak(false, true, Ordering::Acquire, Ordering::Relaxed)
            .ok()
            .map(|_| SpinGuard(self))
    }

    pub fn is_locked(&self) -> bool {
        self.held.load(Ordering::Relaxed)
    }
}

#[must_use]
#[derive(Debug)]
pub struct SpinGuard<'a>(&'a SpinLock);

impl Drop for SpinGuard<'_> {
    fn drop(&mut self) {
        self.0.held.store(false, Ordering::Release);
    }
}

/// One spin lock per index. Sets of locks are always taken in ascending
/// index order, so two workers can never wait on each other in a cycle.
#[derive(Debug)]
pub struct LockTable {
    locks: Box<[SpinLock]>,
}

impl LockTable {
    pub fn new(len: usize) -> Self {
        Self {
            locks: (0..len).map(|_| SpinLock::new()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.locks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locks.is_empty()
    }

    pub fn lock(&self, i: usize) -> SpinGuard<'_> {
        self.locks[i].lock()
    }

    /// Locks every index in `idx`, in ascending order, each once.
    pub fn lock_set(&self, idx: &[usize]) -> LockSet<'_> {
        let mut guards = Vec::with_capacity(idx.len());
        if idx.windows(2).all(|w| w[0] < w[1]) {
            guards.extend(idx.iter().map(|&i| self.locks[i].lock()));
        } else {
            let mut sorted = idx.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            guards.extend(sorted.iter().map(|&i| self.locks[i].lock()));
        }
        LockSet(guards)
    }
}

/// Guards of a lock set, released in reverse acquisition order.
#[must_use]
#[derive(Debug)]
pub struct LockSet<'a>(Vec<SpinGuard<'a>>);

impl Drop for LockSet<'_> {
    fn drop(&mut self) {
        while self.0.pop().is_some() {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guards_release() {
        let t = LockTable::new(4);
        {
            let _s = t.lock_set(&[3, 1, 1]);
            assert!(t.locks[1].is_locked() && t.locks[3].is_locked());
            assert!(!t.locks[0].is_locked());
            assert!(t.locks[3].try_lock().is_none());
        }
        assert!(t.locks.iter().all(|l| !l.is_locked()));
    }
}
