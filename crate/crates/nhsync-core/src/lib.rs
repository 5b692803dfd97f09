//! Numerical toolkit for non-autonomous oscillators.
//!
//! The crate treats a forced oscillator as a family of solutions living on a
//! normally hyperbolic invariant graph `r = rho(theta, phi)` over the torus of
//! oscillator and forcing phases. It provides:
//!
//! * [`ode`] — adaptive Runge-Kutta integration with dense output and
//!   tangent-space (variational) propagation for Lyapunov exponents.
//! * [`models`] — concrete systems: the forced Poincare oscillator, a class I
//!   (SNIC) neuron, a Rossler system, a cubic-nonlinearity circuit, coupled
//!   pairs and phase-only models.
//! * [`graph`] — the graph transform that computes invariant graphs, a
//!   pullback-sampling cross-check, slope (derivative) fields and empirical
//!   normal-hyperbolicity rates.
//! * [`sync`] — rotation numbers, m:n locking detection, fiber phase collapse,
//!   Arnold-tongue sweeps and uniform-attraction tests.
//! * [`network`] — oscillator networks, pairwise synchronization matrices and
//!   hierarchical aggregation into effective oscillators.
//! * [`chaos`] — Poincare sections, return-time coherence and phase locking of
//!   chaotic oscillators.

pub mod chaos;
pub mod graph;
pub mod linalg;
pub mod models;
pub mod network;
pub mod ode;
pub mod sync;

pub use graph::{NhRates, PhaseNormalSystem, TorusGraph};
pub use models::{CircuitParams, ClassINeuronParams, CoupledPair, PoincareParams, RosslerParams};
pub use network::{AggregationTree, NetworkSpec};
pub use ode::{SystemSpec, Trajectory};
pub use sync::{PhaseSeries, SyncReport};

pub const TAU: f64 = std::f64::consts::TAU;
