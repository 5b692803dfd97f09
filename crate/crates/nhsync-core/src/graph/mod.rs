//! Normally hyperbolic invariant graphs over phase tori.
//!
//! A graph `r = rho(theta, phi)` is a candidate invariant manifold for a
//! [`PhaseNormalSystem`]. [`solve_graph`] iterates the graph transform until
//! it reaches a fixed point; [`pullback_graph`] estimates the same graph by
//! forward ensemble integration from the remote past; [`slope_field`] solves
//! the slope (derivative) equation along on-graph trajectories; [`nh_rates`]
//! measures the empirical normal and tangential contraction rates that
//! justify the whole construction.

mod rates;
mod system;
mod torus;
mod transform;

#[cfg(test)]
mod tests;

pub use rates::{
    invariance_residual, max_instantaneous_tangential_rate, nh_rates, persistence_threshold,
    NhRates,
};
pub use system::{wrap_angle, PhaseNormalSystem, SplitFieldFn};
pub use torus::TorusGraph;
pub use transform::{
    graph_transform_step, interpolation_error_probe, pullback_graph, slope_field, solve_graph,
    GraphConfig, GraphSolution, PullbackInfo,
};

use crate::ode::OdeError;
use std::fmt;

#[derive(Debug)]
pub enum GraphError {
    /// A trajectory left the chart's validity domain.
    ChartEscape {
        t: f64,
    },
    /// Underlying integration failed.
    Ode(OdeError),
    /// Iteration did not contract; carries the last iterate and diagnostics.
    /// Expected past the persistence threshold.
    NoNhGraphFound(Box<GraphSolution>),
    /// Pullback sampling left too many cells empty.
    InsufficientSampling {
        empty_fraction: f64,
    },
    /// Slope iteration blew up: empirical violation of the NH ratio.
    NhRatioViolation {
        sup: f64,
    },
    InvalidInput(String),
    Io(String),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::ChartEscape { t } => write!(f, "trajectory left chart domain at t={t}"),
            GraphError::Ode(e) => write!(f, "integration failure: {e}"),
            GraphError::NoNhGraphFound(sol) => write!(
                f,
                "graph transform did not contract after {} iterations (last delta {:.3e})",
                sol.deltas.len(),
                sol.deltas.last().copied().unwrap_or(f64::NAN)
            ),
            GraphError::InsufficientSampling { empty_fraction } => {
                write!(f, "{:.0}% of cells empty", 100.0 * empty_fraction)
            }
            GraphError::NhRatioViolation { sup } => {
                write!(f, "slope field blew up (sup {sup:.3e})")
            }
            GraphError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            GraphError::Io(msg) => write!(f, "graph io: {msg}"),
        }
    }
}

impl std::error::Error for GraphError {}

impl From<OdeError> for GraphError {
    fn from(e: OdeError) -> Self {
        GraphError::Ode(e)
    }
}
