use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Accumulates operation counts using the stored-nonzero convention: one
/// unit per matrix entry touched. Coarse direct solves are charged
/// separately as the nonzero count of the factors.
#[derive(Debug, Default)]
pub struct FlopLedger {
    ops: AtomicU64,
    coarse: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopSnapshot {
    pub ops: u64,
    pub coarse: u64,
}

impl FlopSnapshot {
    pub fn total(&self) -> u64 {
        self.ops + self.coarse
    }
}

impl FlopLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&self, units: usize) {
        self.ops.fetch_add(units as u64, Ordering::Relaxed);
    }

    pub fn charge_coarse(&self, units: usize) {
        self.coarse.fetch_add(units as u64, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> FlopSnapshot {
        FlopSnapshot {
            ops: self.ops.load(Ordering::Relaxed),
            coarse: self.coarse.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.ops.store(0, Ordering::Relaxed);
        self.coarse.store(0, Ordering::Relaxed);
    }
}
