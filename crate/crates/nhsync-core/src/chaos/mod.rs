//! Sections, return-time coherence and phase locking for chaotic oscillators.

mod coherence;
mod locking;
mod phase;
mod section;

pub use coherence::{coherence, CoherenceReport};
pub use locking::{chaos_locking, ChaosLockingOptions};
pub use phase::{chaotic_phase, chaotic_phase_series};
pub use section::{section_crossings, Crossing, CrossingDirection, SectionSpec};

use crate::ode::OdeError;
use crate::sync::SyncError;
use std::fmt;

#[derive(Debug)]
pub enum ChaosError {
    InsufficientData(String),
    /// Phase query outside the crossing span.
    OutOfSpan {
        t: f64,
        lo: f64,
        hi: f64,
    },
    Invalid(String),
    Ode(OdeError),
    Sync(SyncError),
}

impl fmt::Display for ChaosError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChaosError::InsufficientData(m) => write!(f, "insufficient data: {m}"),
            ChaosError::OutOfSpan { t, lo, hi } => {
                write!(f, "t={t} outside crossing span [{lo}, {hi}]")
            }
            ChaosError::Invalid(m) => write!(f, "invalid input: {m}"),
            ChaosError::Ode(e) => write!(f, "integration failure: {e}"),
            ChaosError::Sync(e) => write!(f, "analysis failure: {e}"),
        }
    }
}

impl std::error::Error for ChaosError {}

impl From<OdeError> for ChaosError {
    fn from(e: OdeError) -> Self {
        ChaosError::Ode(e)
    }
}

impl From<SyncError> for ChaosError {
    fn from(e: SyncError) -> Self {
        ChaosError::Sync(e)
    }
}
