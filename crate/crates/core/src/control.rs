//! Cooperative cancellation and progress reporting for long computations
//! (t-SNE optimisation, Gibbs sampling) run as background jobs.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

/// Shared handle between a job runner and the computation it drives.
///
/// Clones share state. Progress is stored monotonically: reporting a value
/// lower than the current one is ignored.
#[derive(Debug, Clone, Default)]
pub struct JobControl {
    inner: Arc<Inner>,
}

#[derive(Debug, Default)]
struct Inner {
    cancelled: AtomicBool,
    progress_bits: AtomicU64,
}

impl JobControl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.inner.cancelled.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.inner.cancelled.load(Ordering::SeqCst)
    }

    /// Record progress in `[0, 1]`.
    pub fn report(&self, fraction: f64) {
        let fraction = fraction.clamp(0.0, 1.0);
        let _ = self
            .inner
            .progress_bits
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |cur| (fraction > f64::from_bits(cur)).then(|| fraction.to_bits()));
    }

    pub fn progress(&self) -> f64 {
        f64::from_bits(self.inner.progress_bits.load(Ordering::SeqCst))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn progress_never_decreases() {
        let c = JobControl::new();
        c.report(0.5);
        c.report(0.2);
        assert_eq!(c.progress(), 0.5);
        c.report(2.0);
        assert_eq!(c.progress(), 1.0);
    }

    #[test]
    fn cancel_is_shared() {
        let c = JobControl::new();
        let d = c.clone();
        assert!(!d.is_cancelled());
        c.cancel();
        assert!(d.is_cancelled());
    }
}
