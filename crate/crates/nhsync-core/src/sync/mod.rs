//! Phase extraction, rotation numbers, locking detection and tongue sweeps.

mod attract;
mod collapse;
mod locking;
mod rotation;
mod tongue;

pub use attract::{attracting_trajectory, AttractionVerdict};
pub use collapse::{phase_collapse, CollapseOptions, CollapseReport};
pub use locking::{detect_mn_locking, detect_mn_locking_slices, LockRatio};
pub use rotation::rotation_number;
pub use tongue::{
    adler_scan_family, arnold_tongue_scan, ScanBudget, ScanPoint, ScanSystem, TongueGrid,
};

use crate::ode::OdeError;
use std::fmt;

/// Default locking bound: sup-variation below `0.45 * 2 pi` counts as locked.
pub const DEFAULT_LOCK_BOUND: f64 = 0.45 * crate::TAU;
/// Default fraction of a series discarded as transient.
pub const DEFAULT_DISCARD: f64 = 0.2;

#[derive(Debug)]
pub enum SyncError {
    InsufficientData(String),
    GridMismatch(String),
    Invalid(String),
    Flow(OdeError),
}

impl fmt::Display for SyncError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyncError::InsufficientData(m) => write!(f, "insufficient data: {m}"),
            SyncError::GridMismatch(m) => write!(f, "grid mismatch: {m}"),
            SyncError::Invalid(m) => write!(f, "invalid input: {m}"),
            SyncError::Flow(e) => write!(f, "flow failed: {e}"),
        }
    }
}

impl std::error::Error for SyncError {}

impl From<OdeError> for SyncError {
    fn from(e: OdeError) -> Self {
        SyncError::Flow(e)
    }
}

/// Unwrapped phase record, possibly with several components on a shared grid.
#[derive(Debug, Clone)]
pub struct PhaseSeries {
    times: Vec<f64>,
    components: Vec<Vec<f64>>,
}

impl PhaseSeries {
    /// Build from raw samples, continuing each component onto the nearest
    /// branch (adds the multiple of `2 pi` that keeps successive jumps in
    /// `(-pi, pi]`). Already-unwrapped input with sane sampling is unchanged.
    pub fn from_samples(times: Vec<f64>, raw: Vec<Vec<f64>>) -> Result<Self, SyncError> {
        if times.len() < 2 {
            return Err(SyncError::InsufficientData(
                "need at least 2 samples".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SyncError::Invalid("times must strictly increase".into()));
        }
        if raw.is_empty() || raw.iter().any(|c| c.len() != times.len()) {
            return Err(SyncError::Invalid(
                "each component must match the time grid".into(),
            ));
        }
        let components = raw
            .into_iter()
            .map(|c| {
                let mut out = Vec::with_capacity(c.len());
                let mut prev = c[0];
                out.push(prev);
                for &w in &c[1..] {
                    let k = ((prev - w) / crate::TAU).round();
                    let x = w + crate::TAU * k;
                    prev = x;
                    out.push(x);
                }
                out
            })
            .collect();
        Ok(PhaseSeries { times, components })
    }

    pub fn single(times: Vec<f64>, phases: Vec<f64>) -> Result<Self, SyncError> {
        Self::from_samples(times, vec![phases])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Index of the first sample past the transient.
    pub(crate) fn discard_index(&self, discard_fraction: f64) -> usize {
        ((self.len() as f64 * discard_fraction) as usize).min(self.len() - 2)
    }

    /// Sub-series over the sample index range `[lo, hi)`.
    pub fn window(&self, lo: usize, hi: usize) -> Result<PhaseSeries, SyncError> {
        if lo + 2 > hi || hi > self.len() {
            return Err(SyncError::Invalid("bad window bounds".into()));
        }
        Ok(PhaseSeries {
            times: self.times[lo..hi].to_vec(),
            components: self.components.iter().map(|c| c[lo..hi].to_vec()).collect(),
        })
    }
}

/// Synchronization summary for a run or a scan point.
#[derive(Debug, Clone)]
pub struct SyncReport {
    /// Per phase: (cycles per unit time, error estimate).
    pub rotation_numbers: Vec<(f64, f64)>,
    pub locking: Option<LockRatio>,
    /// Attracting phase clusters on the fiber, when measured.
    pub cluster_count: Option<usize>,
    pub lyapunov: Vec<f64>,
}
