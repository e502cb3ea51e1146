use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

/// Predefined update order: iteration indices are handed out as tickets and
/// the update carrying ticket k is applied only once updates 0..k are in.
///
/// A worker keeps its finished gradient until its slot comes up, so each
/// worker's held update is the mailbox of its slot.
#[derive(Debug, Default)]
pub struct UpdateOrderQueue {
    next: AtomicUsize,
    applied: AtomicUsize,
    aborted: AtomicBool,
}

impl UpdateOrderQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Claims the next iteration index.
    #[inline]
    pub fn ticket(&self) -> usize {
        self.next.fetch_add(1, Ordering::Relaxed)
    }

    /// Number of updates applied so far: the index of the current state.
    #[inline]
    pub fn applied(&self) -> usize {
        self.applied.load(Ordering::Acquire)
    }

    /// Blocks until ticket `k` is next in line. Returns false on abort.
    pub fn wait_turn(&self, k: usize) -> bool {
        let mut spins = 0u32;
        while self.applied.load(Ordering::Acquire) != k {
            if self.aborted.load(Ordering::Relaxed) {
                return false;
            }
            if spins < 64 {
                std::hint::spin_loop();
                spins += 1;
            } else {
                std::thread::yield_now();
            }
        }
        true
    }

    #[inline]
    pub fn advance(&self) {
        self.applied.fetch_add(1, Ordering::Release);
    }

    pub fn abort(&self) {
        self.aborted.store(true, Ordering::Relaxed);
    }

    pub fn is_aborted(&self) -> bool {
        self.aborted.load(Ordering::Relaxed)
    }

    /// Rewinds the ticket counter to `k` between blocks, once every worker
    /// has stopped.
    pub(crate) fn resume_at(&self, k: usize) {
        self.next.store(k, Ordering::Relaxed);
    }
}
