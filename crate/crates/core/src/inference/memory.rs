use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

#[derive(Debug, Default)]
struct Counters {
    current: AtomicUsize,
    peak: AtomicUsize,
}

/// Byte accounting for live per-mini-batch storage (messages and document
/// statistics). Cheap to clone; clones share the counters.
#[derive(Debug, Clone, Default)]
pub struct StorageMeter {
    inner: Arc<Counters>,
}

impl StorageMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn current(&self) -> usize {
        self.inner.current.load(Ordering::SeqCst)
    }

    pub fn peak(&self) -> usize {
        self.inner.peak.load(Ordering::SeqCst)
    }

    /// Register `bytes` as live until the guard is dropped.
    pub fn track(&self, bytes: usize) -> MeterGuard {
        let now = self.inner.current.fetch_add(bytes, Ordering::SeqCst) + bytes;
        self.inner.peak.fetch_max(now, Ordering::SeqCst);
        MeterGuard {
            meter: self.clone(),
            bytes,
        }
    }
}

#[derive(Debug)]
pub struct MeterGuard {
    meter: StorageMeter,
    bytes: usize,
}

impl Drop for MeterGuard {
    fn drop(&mut self) {
        self.meter.inner.current.fetch_sub(self.bytes, Ordering::SeqCst);
    }
}
