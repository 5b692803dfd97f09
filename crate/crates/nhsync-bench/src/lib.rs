//! Shared fixtures for the criterion benches.

use nhsync_core::graph::{PhaseNormalSystem, TorusGraph};
use nhsync_core::models::{poincare_polar, Forcing, PoincareParams};

pub fn forced_polar(gamma: f64) -> PhaseNormalSystem {
    poincare_polar(&PoincareParams {
        gamma,
        forcing: Forcing::SingleTone { omega: 2.0 },
        ..Default::default()
    })
    .expect("valid params")
}

pub fn wavy_graph(n: usize) -> TorusGraph {
    TorusGraph::from_fn(vec![n, n], 1, |a, out| {
        out[0] = 1.0 + 0.05 * (a[0] + a[1]).sin() + 0.02 * (2.0 * a[0]).cos();
    })
}
