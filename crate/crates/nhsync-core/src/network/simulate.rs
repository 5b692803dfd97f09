use super::{NetworkError, NetworkSpec};
use crate::ode::{integrate, Trajectory};
use crate::sync::PhaseSeries;

/// Full product-system trajectory plus the per-node unwrapped phases.
#[derive(Debug, Clone)]
pub struct NetworkRun {
    pub trajectory: Trajectory,
    /// One component per node, sampled on a uniform grid.
    pub phases: PhaseSeries,
}

/// Integrate the network over `[t0, t0 + horizon]` and extract each node's
/// phase through its chart, sampled every `dt`.
pub fn simulate_network(
    net: &NetworkSpec,
    x0: Option<&[f64]>,
    t0: f64,
    horizon: f64,
    dt: f64,
    tol: f64,
) -> Result<NetworkRun, NetworkError> {
    net.validate()?;
    if horizon <= 0.0 || dt <= 0.0 {
        return Err(NetworkError::Invalid("need positive horizon and dt".into()));
    }
    let sys = net.to_system();
    let default_x0 = net.default_x0();
    let x0 = x0.unwrap_or(&default_x0);
    if x0.len() != net.total_dim() {
        return Err(NetworkError::Invalid("x0 length mismatch".into()));
    }
    let trajectory = integrate(&sys, x0, t0, t0 + horizon, tol)?;

    let ts = trajectory.uniform_grid(dt);
    let offsets = net.offsets();
    let mut raw: Vec<Vec<f64>> = vec![Vec::with_capacity(ts.len()); net.n_nodes()];
    let mut buf = vec![0.0; net.total_dim()];
    for &t in &ts {
        trajectory.sample_into(t, &mut buf)?;
        for (i, node) in net.nodes.iter().enumerate() {
            let s = offsets[i];
            raw[i].push((node.chart)(&buf[s..s + node.dim()], t));
        }
    }
    let phases = PhaseSeries::from_samples(ts, raw)?;
    Ok(NetworkRun { trajectory, phases })
}
