//! Oscillator networks and hierarchical aggregation into synchronized
//! clusters.

mod aggregate;
mod cluster;
mod simulate;

pub use aggregate::{
    aggregate, collective_phases, effective_oscillator, reduce_network, AggregateOptions,
    AggregationLevel, AggregationTree, EffectiveOscillator, ReducedNetwork,
};
pub use cluster::{find_clusters, sync_matrix, SyncMatrix};
pub use simulate::{simulate_network, NetworkRun};

use crate::ode::{OdeError, SystemSpec};
use crate::sync::SyncError;
use std::fmt;
use std::sync::Arc;

#[derive(Debug)]
pub enum NetworkError {
    Invalid(String),
    /// A cluster operation was asked of a set that is not 1:1 locked.
    NotLocked(String),
    Ode(OdeError),
    Sync(SyncError),
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::Invalid(m) => write!(f, "invalid network: {m}"),
            NetworkError::NotLocked(m) => write!(f, "cluster not locked: {m}"),
            NetworkError::Ode(e) => write!(f, "integration failure: {e}"),
            NetworkError::Sync(e) => write!(f, "analysis failure: {e}"),
        }
    }
}

impl std::error::Error for NetworkError {}

impl From<OdeError> for NetworkError {
    fn from(e: OdeError) -> Self {
        NetworkError::Ode(e)
    }
}

impl From<SyncError> for NetworkError {
    fn from(e: SyncError) -> Self {
        NetworkError::Sync(e)
    }
}

/// External forcing on one node: velocity += signal(t) * direction.
#[derive(Clone)]
pub struct NodeInput {
    pub signal: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub direction: Vec<f64>,
}

/// One oscillator with its phase chart and optional external input.
#[derive(Clone)]
pub struct NodeSpec {
    pub sys: SystemSpec,
    /// Phase of a node state (may wrap; series extraction unwraps).
    pub chart: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
    pub x0: Vec<f64>,
    pub input: Option<NodeInput>,
}

impl fmt::Debug for NodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NodeSpec")
            .field("dim", &self.sys.dim())
            .field("has_input", &self.input.is_some())
            .finish()
    }
}

impl NodeSpec {
    /// A bare phase oscillator `theta' = omega`.
    pub fn phase_oscillator(omega: f64, theta0: f64) -> Self {
        NodeSpec {
            sys: SystemSpec::new(1, move |_x, _t, out| out[0] = omega).with_jacobian(
                |_x, _t, out| {
                    out[0] = 0.0;
                },
            ),
            chart: Arc::new(|x, _t| x[0]),
            x0: vec![theta0],
            input: None,
        }
    }

    /// A Poincare oscillator node in Cartesian coordinates with the
    /// `atan2` phase chart.
    pub fn poincare(params: &crate::models::PoincareParams, x0: Vec<f64>) -> Self {
        let sys = crate::models::poincare_cartesian(params).expect("valid params");
        NodeSpec {
            sys,
            chart: Arc::new(|x, _t| x[1].atan2(x[0])),
            x0,
            input: None,
        }
    }

    pub fn with_input(
        mut self,
        signal: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        direction: Vec<f64>,
    ) -> Self {
        assert_eq!(direction.len(), self.sys.dim());
        self.input = Some(NodeInput { signal, direction });
        self
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }
}

/// Directed coupling term: velocity of `to` += strength * g(x_to, x_from).
#[derive(Clone)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub strength: f64,
    pub coupling: Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>,
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Edge {{ {} -> {}, k = {} }}",
            self.from, self.to, self.strength
        )
    }
}

impl Edge {
    /// First-harmonic phase coupling `sin(theta_from - theta_to)` for
    /// 1-dimensional phase nodes.
    pub fn sine(from: usize, to: usize, strength: f64) -> Self {
        Edge {
            from,
            to,
            strength,
            coupling: Arc::new(|x_to, x_from, out| {
                out[0] = (x_from[0] - x_to[0]).sin();
            }),
        }
    }

    /// Componentwise diffusive coupling `x_from - x_to`.
    pub fn diffusive(from: usize, to: usize, strength: f64) -> Self {
        Edge {
            from,
            to,
            strength,
            coupling: Arc::new(|x_to, x_from, out| {
                for i in 0..out.len() {
                    out[i] = x_from[i] - x_to[i];
                }
            }),
        }
    }
}

/// A directed network of oscillators. Zero-strength networks decouple
/// exactly.
#[derive(Debug, Clone, Default)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<Edge>,
}

impl NetworkSpec {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_dim(&self) -> usize {
        self.nodes.iter().map(|n| n.dim()).sum()
    }

    /// State offset of each node in the concatenated state.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.nodes.len());
        let mut acc = 0;
        for n in &self.nodes {
            off.push(acc);
            acc += n.dim();
        }
        off
    }

    pub fn default_x0(&self) -> Vec<f64> {
        let mut x0 = Vec::with_capacity(self.total_dim());
        for n in &self.nodes {
            x0.extend_from_slice(&n.x0);
        }
        x0
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.nodes.is_empty() {
            return Err(NetworkError::Invalid("no nodes".into()));
        }
        for e in &self.edges {
            if e.from >= self.nodes.len() || e.to >= self.nodes.len() {
                return Err(NetworkError::Invalid(format!(
                    "edge {} -> {} outside node range",
                    e.from, e.to
                )));
            }
        }
        for n in &self.nodes {
            if n.x0.len() != n.dim() {
                return Err(NetworkError::Invalid("node x0 length mismatch".into()));
            }
        }
        Ok(())
    }

    /// Assemble the product system (node fields + inputs + couplings).
    pub fn to_system(&self) -> SystemSpec {
        let nodes = self.nodes.clone();
        let edges = self.edges.clone();
        let offsets = self.offsets();
        let dims: Vec<usize> = nodes.iter().map(|n| n.dim()).collect();
        let total = self.total_dim();
        let max_dim = dims.iter().copied().max().unwrap_or(1);
        SystemSpec::new(total, move |x, t, out| {
            for (i, node) in nodes.iter().enumerate() {
                let s = offsets[i];
                let xi = &x[s..s + dims[i]];
                node.sys.eval(xi, t, &mut out[s..s + dims[i]]);
                if let Some(inp) = &node.input {
                    let u = (inp.signal)(t);
                    for (k, d) in inp.direction.iter().enumerate() {
                        out[s + k] += u * d;
                    }
                }
            }
            let mut buf = vec![0.0; max_dim];
            for e in &edges {
                if e.strength == 0.0 {
                    continue;
                }
                let (sf, st) = (offsets[e.from], offsets[e.to]);
                let g = &mut buf[..dims[e.to]];
                (e.coupling)(&x[st..st + dims[e.to]], &x[sf..sf + dims[e.from]], g);
                for k in 0..dims[e.to] {
                    out[st + k] += e.strength * g[k];
                }
            }
        })
    }
}

/// A 6-node two-block benchmark: all-to-all sine coupling `k_intra` inside
/// each 3-node block, `k_inter` between blocks, natural frequencies
/// `base +/- spread`.
pub fn two_block_network(
    freqs_a: [f64; 3],
    freqs_b: [f64; 3],
    k_intra: f64,
    k_inter: f64,
) -> NetworkSpec {
    let mut nodes = Vec::new();
    for (i, &w) in freqs_a.iter().chain(freqs_b.iter()).enumerate() {
        nodes.push(NodeSpec::phase_oscillator(w, 0.61 * i as f64));
    }
    let mut edges = Vec::new();
    for i in 0..6 {
        for j in 0..6 {
            if i == j {
                continue;
            }
            let same_block = (i < 3) == (j < 3);
            let k = if same_block { k_intra } else { k_inter };
            edges.push(Edge::sine(j, i, k));
        }
    }
    NetworkSpec { nodes, edges }
}
