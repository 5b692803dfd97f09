//! Strict experiment configuration: unknown keys are rejected everywhere and
//! a fixed seed fully determines any randomized sampling.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Simulate,
    Graph,
    Tongue,
    Collapse,
    Aggregate,
    Lyapunov,
    Coherence,
}

impl ExperimentKind {
    /// Sweep-style kinds parallelize internally and default to all cores.
    pub fn is_sweep(self) -> bool {
        matches!(
            self,
            ExperimentKind::Tongue | ExperimentKind::Graph | ExperimentKind::Aggregate
        )
    }
}

fn default_experiment() -> ExperimentKind {
    ExperimentKind::Simulate
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Backward window of the graph transform; auto-sized when absent.
    #[serde(default)]
    pub window: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_tol() -> f64 {
    1e-8
}
fn default_horizon() -> f64 {
    200.0
}
fn default_grid() -> usize {
    128
}
fn default_dt() -> f64 {
    0.05
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            tol: default_tol(),
            horizon: default_horizon(),
            grid: default_grid(),
            window: None,
            seed: 0,
            dt: default_dt(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    /// Initial state override.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub delta_min: f64,
    pub delta_max: f64,
    pub k_min: f64,
    pub k_max: f64,
    #[serde(default = "default_scan_res")]
    pub n_delta: usize,
    #[serde(default = "default_scan_res")]
    pub n_k: usize,
    #[serde(default = "default_omega_ref")]
    pub omega_ref: f64,
    #[serde(default = "default_one")]
    pub m_max: u32,
    #[serde(default = "default_one")]
    pub n_max: u32,
}

fn default_scan_res() -> usize {
    64
}
fn default_omega_ref() -> f64 {
    1.0
}
fn default_one() -> u32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseConfig {
    #[serde(default = "default_ring")]
    pub ring: usize,
    #[serde(default)]
    pub phi0: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_gap")]
    pub gap_threshold: f64,
}

fn default_ring() -> usize {
    64
}
fn default_gap() -> f64 {
    0.5
}

impl Default for CollapseConfig {
    fn default() -> Self {
        CollapseConfig {
            ring: default_ring(),
            phi0: vec![],
            t0: 0.0,
            gap_threshold: default_gap(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum NodeKind {
    Kuramoto,
    Poincare,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub amp: f64,
    pub freq: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub kind: NodeKind,
    /// Natural frequency (kuramoto nodes).
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub theta0: Option<f64>,
    /// Poincare parameters (poincare nodes).
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub input: Option<InputConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Sine,
    Diffusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub from: usize,
    pub to: usize,
    pub strength: f64,
    #[serde(default = "default_edge_kind")]
    pub kind: EdgeKind,
}

fn default_edge_kind() -> EdgeKind {
    EdgeKind::Sine
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub nodes: Vec<NodeConfig>,
    #[serde(default)]
    pub edges: Vec<EdgeConfig>,
    #[serde(default = "default_val_window")]
    pub validation_window: f64,
    #[serde(default = "default_val_threshold")]
    pub validation_threshold: f64,
    #[serde(default = "default_max_levels")]
    pub max_levels: usize,
}

fn default_val_window() -> f64 {
    50.0
}
fn default_val_threshold() -> f64 {
    0.15
}
fn default_max_levels() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment")]
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub collapse: Option<CollapseConfig>,
    #[serde(default)]
    pub network: Option<NetworkConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_output_dir() -> String {
    "nhsync-out".into()
}

pub const KNOWN_MODELS: &[&str] = &[
    "poincare",
    "class1",
    "circuit",
    "rossler",
    "forced_rossler",
    "adler",
];

fn allowed_params(model: &str) -> &'static [&'static str] {
    match model {
        "poincare" => &[
            "alpha",
            "a",
            "omega",
            "gamma",
            "forcing",
            "forcing_omega",
            "q_variant",
        ],
        "class1" => &["mu"],
        "circuit" => &["a", "b", "c", "e", "f", "g1", "g3"],
        "rossler" => &["a", "b", "c"],
        "forced_rossler" => &["a", "b", "c", "amp", "omega_f"],
        "adler" => &["delta", "k"],
        _ => &[],
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range and cross-field checks; error messages carry the field path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = &self.numerics;
        if !(n.tol > 1e-14 && n.tol < 1e-2) {
            return Err(ConfigError(format!(
                "numerics.tol: {} outside (1e-14, 1e-2)",
                n.tol
            )));
        }
        if !(n.horizon > 0.0 && n.horizon.is_finite()) {
            return Err(ConfigError("numerics.horizon: must be positive".into()));
        }
        if n.grid < 4 || n.grid > 1024 {
            return Err(ConfigError(format!(
                "numerics.grid: {} outside [4, 1024]",
                n.grid
            )));
        }
        if let Some(w) = n.window {
            if !(w > 0.0) {
                return Err(ConfigError("numerics.window: must be positive".into()));
            }
        }
        if !(n.dt > 0.0) {
            return Err(ConfigError("numerics.dt: must be positive".into()));
        }

        if let Some(model) = &self.model {
            if !KNOWN_MODELS.contains(&model.name.as_str()) {
                return Err(ConfigError(format!(
                    "model.name: unknown model '{}' (known: {})",
                    model.name,
                    KNOWN_MODELS.join(", ")
                )));
            }
            let allowed = allowed_params(&model.name);
            for key in model.params.keys() {
                if !allowed.contains(&key.as_str()) {
                    return Err(ConfigError(format!(
                        "model.params.{key}: unknown parameter for model '{}'",
                        model.name
                    )));
                }
            }
        }

        match self.experiment {
            ExperimentKind::Tongue => {
                let scan = self
                    .scan
                    .as_ref()
                    .ok_or_else(|| ConfigError("scan: required for tongue experiments".into()))?;
                if scan.n_delta < 2 || scan.n_k < 2 || scan.n_delta > 256 || scan.n_k > 256 {
                    return Err(ConfigError(
                        "scan.n_delta/.n_k: resolution must be within 2..=256".into(),
                    ));
                }
                if !(scan.delta_max > scan.delta_min) {
                    return Err(ConfigError("scan.delta_max: must exceed delta_min".into()));
                }
                if !(scan.k_max > scan.k_min) {
                    return Err(ConfigError("scan.k_max: must exceed k_min".into()));
                }
            }
            ExperimentKind::Aggregate => {
                let net = self.network.as_ref().ok_or_else(|| {
                    ConfigError("network: required for aggregate experiments".into())
                })?;
                if net.nodes.is_empty() {
                    return Err(ConfigError("network.nodes: must not be empty".into()));
                }
                for (i, e) in net.edges.iter().enumerate() {
                    if e.from >= net.nodes.len() || e.to >= net.nodes.len() {
                        return Err(ConfigError(format!(
                            "network.edges[{i}]: endpoint outside node range"
                        )));
                    }
                }
                for (i, node) in net.nodes.iter().enumerate() {
                    match node.kind {
                        NodeKind::Kuramoto => {
                            if node.omega.is_none() {
                                return Err(ConfigError(format!(
                                    "network.nodes[{i}].omega: required for kuramoto nodes"
                                )));
                            }
                        }
                        NodeKind::Poincare => {}
                    }
                }
            }
            ExperimentKind::Simulate
            | ExperimentKind::Graph
            | ExperimentKind::Collapse
            | ExperimentKind::Lyapunov
            | ExperimentKind::Coherence => {
                if self.model.is_none() {
                    return Err(ConfigError("model: required for this experiment".into()));
                }
            }
        }
        if let Some(c) = &self.collapse {
            if c.ring < 32 {
                return Err(ConfigError("collapse.ring: must be at least 32".into()));
            }
        }
        Ok(())
    }

    /// Normalized form with all defaults explicit. Idempotent: normalizing
    /// the output yields the same bytes.
    pub fn normalized_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable config");
        s.push('\n');
        s
    }

    /// Resolved worker thread count: CLI/env overrides first, then the
    /// config, then all cores for sweep kinds and one otherwise.
    pub fn resolve_threads(&self, cli_threads: Option<usize>) -> usize {
        if let Some(t) = cli_threads {
            return t.max(1);
        }
        if let Some(t) = self.threads {
            return t.max(1);
        }
        if let Ok(v) = std::env::var("NHSYNC_THREADS") {
            if let Ok(t) = v.parse::<usize>() {
                return t.max(1);
            }
        }
        if self.experiment.is_sweep() {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            1
        }
    }
}

/// Read an f64 parameter with a field-path error.
pub fn param_f64(
    params: &serde_json::Map<String, serde_json::Value>,
    key: &str,
    default: f64,
) -> Result<f64, ConfigError> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| ConfigError(format!("model.params.{key}: expected a number"))),
    }
}

pub fn param_str<'a>(
    params: &'a serde_json::Map<String, serde_json::Value>,
    key: &str,
    default: &'a str,
) -> Result<&'a str, ConfigError> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_str()
            .ok_or_else(|| ConfigError(format!("model.params.{key}: expected a string"))),
    }
}
