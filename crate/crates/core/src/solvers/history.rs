use std::collections::VecDeque;

/// The last `cap` states, addressed by absolute step index.
#[derive(Debug, Clone)]
pub(crate) struct History<T> {
    buf: VecDeque<T>,
    first: usize,
    cap: usize,
}

impl<T> History<T> {
    pub fn new(cap: usize) -> Self {
        Self {
            buf: VecDeque::with_capacity(cap.max(1)),
            first: 0,
            cap: cap.max(1),
        }
    }

    /// Appends the state for the next index; returns the evicted state, if any,
    /// so its buffer can be reused.
    pub fn push(&mut self, item: T) -> Option<T> {
        let evicted = if self.buf.len() == self.cap {
            self.first += 1;
            self.buf.pop_front()
        } else {
            None
        };
        self.buf.push_back(item);
        evicted
    }

    /// Takes the oldest state out if the buffer is full, for reuse before a push.
    pub fn recycle(&mut self) -> Option<T> {
        if self.buf.len() == self.cap {
            self.first += 1;
            self.buf.pop_front()
        } else {
            None
        }
    }

    pub fn get(&self, idx: usize) -> &T {
        assert!(
            idx >= self.first && idx < self.first + self.buf.len(),
            "state {idx} not retained (have {}..{})",
            self.first,
            self.first + self.buf.len()
        );
        &self.buf[idx - self.first]
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.buf.iter_mut()
    }
}
