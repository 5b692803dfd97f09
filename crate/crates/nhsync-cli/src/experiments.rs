use crate::artifacts::{fmt_f, write_csv, write_json};
use crate::config::*;
use nhsync_core::chaos::{coherence, section_crossings, CrossingDirection, SectionSpec};
use nhsync_core::graph::{
    invariance_residual, nh_rates, solve_graph, GraphConfig, GraphError, PhaseNormalSystem,
    TorusGraph,
};
use nhsync_core::models;
use nhsync_core::network::{aggregate, AggregateOptions, Edge, NetworkSpec, NodeSpec};
use nhsync_core::ode::{integrate, integrate_with_tangents, SystemSpec};
use nhsync_core::sync::{
    adler_scan_family, arnold_tongue_scan, phase_collapse, CollapseOptions, ScanBudget,
};
use std::path::Path;
use std::sync::Arc;

pub enum RunError {
    Config(ConfigError),
    /// Numerical failure; diagnostics were (or will be) written.
    Numerical(String),
    Io(std::io::Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

fn numerical<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Numerical(e.to_string())
}

fn model_of(cfg: &ExperimentConfig) -> Result<&ModelConfig, ConfigError> {
    cfg.model
        .as_ref()
        .ok_or_else(|| ConfigError("model: required".into()))
}

fn poincare_params(m: &ModelConfig) -> Result<models::PoincareParams, ConfigError> {
    let forcing = match param_str(&m.params, "forcing", "two_tone")? {
        "two_tone" => models::Forcing::TwoTone,
        "single_tone" => models::Forcing::SingleTone {
            omega: param_f64(&m.params, "forcing_omega", 2.0)?,
        },
        "zero" => models::Forcing::Zero,
        other => {
            return Err(ConfigError(format!(
                "model.params.forcing: unknown variant '{other}'"
            )))
        }
    };
    let q_variant = match param_str(&m.params, "q_variant", "sharp")? {
        "sharp" => models::QVariant::Sharp,
        "smooth" => models::QVariant::Smooth,
        other => {
            return Err(ConfigError(format!(
                "model.params.q_variant: unknown variant '{other}'"
            )))
        }
    };
    Ok(models::PoincareParams {
        alpha: param_f64(&m.params, "alpha", 1.0)?,
        a: param_f64(&m.params, "a", 1.0)?,
        omega: param_f64(&m.params, "omega", 1.0)?,
        gamma: param_f64(&m.params, "gamma", 0.0)?,
        forcing,
        q_variant,
    })
}

/// Build the plain system and a default initial state for time-domain
/// experiments.
fn build_system(m: &ModelConfig) -> Result<(SystemSpec, Vec<f64>), ConfigError> {
    let (sys, x0) = match m.name.as_str() {
        "poincare" => {
            let p = poincare_params(m)?;
            let sys = models::poincare_cartesian(&p).map_err(|e| ConfigError(e.to_string()))?;
            (sys, vec![p.a, 0.0])
        }
        "class1" => {
            let mu = param_f64(&m.params, "mu", 0.5)?;
            (
                models::class1_neuron(&models::ClassINeuronParams { mu, drive: None }),
                vec![0.0, mu],
            )
        }
        "circuit" => {
            let p = models::CircuitParams {
                a: param_f64(&m.params, "a", 0.2)?,
                b: param_f64(&m.params, "b", 1.0)?,
                c: param_f64(&m.params, "c", 1.0)?,
                e: param_f64(&m.params, "e", 1.0)?,
                f: param_f64(&m.params, "f", 1.0)?,
                g1: param_f64(&m.params, "g1", 1.0)?,
                g3: param_f64(&m.params, "g3", 1.0)?,
            };
            let sys = models::circuit(&p).map_err(|e| ConfigError(e.to_string()))?;
            (sys, vec![0.1, 0.0, 0.0])
        }
        "rossler" => {
            let p = rossler_params(m)?;
            (models::rossler(&p), vec![1.0, 1.0, 0.0])
        }
        "forced_rossler" => {
            let p = rossler_params(m)?;
            let amp = param_f64(&m.params, "amp", 0.15)?;
            let omega_f = param_f64(&m.params, "omega_f", 1.07)?;
            (
                models::forced_rossler(&p, amp, omega_f),
                vec![1.0, 1.0, 0.0],
            )
        }
        "adler" => {
            let delta = param_f64(&m.params, "delta", 0.3)?;
            let k = param_f64(&m.params, "k", 0.5)?;
            (models::adler(delta, k), vec![0.3])
        }
        other => return Err(ConfigError(format!("model.name: unknown model '{other}'"))),
    };
    match &m.x0 {
        Some(x) if x.len() == sys.dim() => Ok((sys, x.clone())),
        Some(x) => Err(ConfigError(format!(
            "model.x0: expected {} components, got {}",
            sys.dim(),
            x.len()
        ))),
        None => Ok((sys, x0)),
    }
}

fn rossler_params(m: &ModelConfig) -> Result<models::RosslerParams, ConfigError> {
    Ok(models::RosslerParams {
        a: param_f64(&m.params, "a", 0.2)?,
        b: param_f64(&m.params, "b", 0.2)?,
        c: param_f64(&m.params, "c", 5.7)?,
    })
}

fn graph_dims(sys: &PhaseNormalSystem, grid: usize) -> Vec<usize> {
    let td = sys.torus_dim();
    // 48 per dimension is the sanity cap on 3-tori
    let per_dim = if td <= 2 { grid } else { grid.min(48) };
    vec![per_dim; td]
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, RunError> {
    match cfg.experiment {
        ExperimentKind::Simulate => run_simulate(cfg, out),
        ExperimentKind::Graph => run_graph(cfg, out),
        ExperimentKind::Tongue => run_tongue(cfg, out),
        ExperimentKind::Collapse => run_collapse(cfg, out),
        ExperimentKind::Aggregate => run_aggregate(cfg, out),
        ExperimentKind::Lyapunov => run_lyapunov(cfg, out),
        ExperimentKind::Coherence => run_coherence(cfg, out),
    }
}

fn run_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, RunError> {
    let (sys, x0) = build_system(model_of(cfg)?)?;
    let n = &cfg.numerics;
    let traj = integrate(&sys, &x0, 0.0, n.horizon, n.tol).map_err(numerical)?;
    let ts = traj.uniform_grid(n.dt);
    let mut header = vec!["t".to_string()];
    header.extend((0..sys.dim()).map(|i| format!("x{i}")));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut buf = vec![0.0; sys.dim()];
    let rows = ts.iter().map(|&t| {
        traj.sample_into(t, &mut buf).expect("grid within span");
        let mut row = vec![fmt_f(t)];
        row.extend(buf.iter().map(|&v| fmt_f(v)));
        row
    });
    write_csv(out.join("trajectory.csv"), &header_refs, rows)?;
    Ok(vec!["trajectory.csv".into()])
}

fn run_graph(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, RunError> {
    let m = model_of(cfg)?;
    if m.name != "poincare" {
        return Err(
            ConfigError("model.name: graph experiments need the poincare model".into()).into(),
        );
    }
    let p = poincare_params(m)?;
    let sys = models::poincare_polar(&p).map_err(|e| ConfigError(e.to_string()))?;
    let n = &cfg.numerics;
    let dims = graph_dims(&sys, n.grid);
    let rho0 = TorusGraph::constant(dims, &[p.a]);
    let gcfg = GraphConfig {
        window: n.window,
        tol: (100.0 * n.tol).max(1e-8),
        max_iter: 30,
        ode_tol: n.tol,
    };
    match solve_graph(&rho0, &sys, &gcfg) {
        Ok(sol) => {
            let mut f = std::fs::File::create(out.join("graph.csv"))?;
            sol.graph.write_csv(&mut f)?;
            write_json(out.join("graph_meta.json"), &sol.graph.meta_json())?;
            let rates = nh_rates(&sol.graph, &sys, 12, 15.0, n.tol, n.seed).map_err(numerical)?;
            let residual = invariance_residual(&sol.graph, &sys, 200, n.seed);
            write_json(
                out.join("diagnostics.json"),
                &serde_json::json!({
                    "converged": true,
                    "iterations": sol.iterations,
                    "deltas": sol.deltas,
                    "contraction_factor": sol.contraction_factor,
                    "window": sol.window,
                    "lambda_n": rates.lambda_n,
                    "lambda_t_max": rates.lambda_t_max,
                    "nh_ratio": rates.ratio,
                    "invariance_residual": residual,
                }),
            )?;
            Ok(vec![
                "graph.csv".into(),
                "graph_meta.json".into(),
                "diagnostics.json".into(),
            ])
        }
        Err(GraphError::NoNhGraphFound(sol)) => {
            write_json(
                out.join("diagnostics.json"),
                &serde_json::json!({
                    "converged": false,
                    "iterations": sol.iterations,
                    "deltas": sol.deltas,
                    "contraction_factor": sol.contraction_factor,
                    "window": sol.window,
                }),
            )?;
            Err(RunError::Numerical(
                "graph transform did not converge (see diagnostics.json)".into(),
            ))
        }
        Err(e) => Err(numerical(e)),
    }
}

fn run_tongue(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, RunError> {
    let m = model_of(cfg)?;
    if m.name != "adler" {
        return Err(
            ConfigError("model.name: tongue experiments scan the adler family".into()).into(),
        );
    }
    let scan = cfg.scan.as_ref().expect("validated");
    let n = &cfg.numerics;
    let family = adler_scan_family(scan.omega_ref);
    let budget = ScanBudget {
        horizon: n.horizon,
        dt: n.dt,
        tol: n.tol,
        m_max: scan.m_max,
        n_max: scan.n_max,
        ..Default::default()
    };
    let grid = arnold_tongue_scan(
        &family,
        (scan.delta_min, scan.delta_max),
        (scan.k_min, scan.k_max),
        (scan.n_delta, scan.n_k),
        &budget,
    )
    .map_err(numerical)?;

    let header = [
        "delta",
        "k",
        "locked",
        "m",
        "n",
        "residual",
        "rot_a",
        "rot_a_err",
        "rot_b",
        "rot_b_err",
        "error",
    ];
    let rows = grid.points.iter().map(|p| {
        let mut row = vec![fmt_f(p.delta), fmt_f(p.k)];
        match &p.report {
            Ok(rep) => {
                match rep.locking {
                    Some(l) => {
                        row.push("1".into());
                        row.push(l.m.to_string());
                        row.push(l.n.to_string());
                        row.push(fmt_f(l.residual));
                    }
                    None => {
                        row.push("0".into());
                        row.extend(["", "", ""].map(String::from));
                    }
                }
                for &(v, e) in &rep.rotation_numbers {
                    row.push(fmt_f(v));
                    row.push(fmt_f(e));
                }
                row.push(String::new());
            }
            Err(msg) => {
                row.extend(["", "", "", "", "", "", "", ""].map(String::from));
                row.push(msg.replace(',', ";"));
            }
        }
        row
    });
    write_csv(out.join("tongue.csv"), &header, rows)?;
    Ok(vec!["tongue.csv".into()])
}

fn run_collapse(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, RunError> {
    let m = model_of(cfg)?;
    let n = &cfg.numerics;
    let ccfg = cfg.collapse.clone().unwrap_or_default();
    let opts = CollapseOptions {
        gap_threshold: ccfg.gap_threshold,
        ring_offset: 0.0,
        ode_tol: n.tol,
    };

    let (sys, graph) = match m.name.as_str() {
        "adler" => {
            let delta = param_f64(&m.params, "delta", 0.3)?;
            let k = param_f64(&m.params, "k", 0.5)?;
            (models::adler_phase(delta, k), None)
        }
        "poincare" => {
            let p = poincare_params(m)?;
            let sys = models::poincare_polar(&p).map_err(|e| ConfigError(e.to_string()))?;
            let dims = graph_dims(&sys, n.grid);
            let rho0 = TorusGraph::constant(dims, &[p.a]);
            let gcfg = GraphConfig {
                window: n.window,
                tol: (100.0 * n.tol).max(1e-8),
                max_iter: 30,
                ode_tol: n.tol,
            };
            let sol = solve_graph(&rho0, &sys, &gcfg).map_err(numerical)?;
            (sys, Some(sol.graph))
        }
        other => {
            return Err(ConfigError(format!(
                "model.name: collapse supports adler and poincare, got '{other}'"
            ))
            .into())
        }
    };
    let nf = sys.forcing_frequencies().len();
    let mut phi0 = ccfg.phi0.clone();
    if phi0.len() > nf {
        return Err(ConfigError("collapse.phi0: too many phases".into()).into());
    }
    phi0.resize(nf, 0.0);
    let report = phase_collapse(
        &sys,
        graph.as_ref(),
        &phi0,
        ccfg.t0,
        ccfg.ring,
        n.horizon,
        &opts,
    )
    .map_err(numerical)?;

    let header = ["seed_index", "seed_phase", "final_phase"];
    let rows = report.final_phases.iter().enumerate().map(|(i, &f)| {
        vec![
            i.to_string(),
            fmt_f(nhsync_core::TAU * i as f64 / ccfg.ring as f64),
            fmt_f(f),
        ]
    });
    write_csv(out.join("collapse.csv"), &header, rows)?;
    write_json(
        out.join("collapse_report.json"),
        &serde_json::json!({
            "cluster_count": report.cluster_count,
            "cluster_phases": report.cluster_phases,
        }),
    )?;
    Ok(vec!["collapse.csv".into(), "collapse_report.json".into()])
}

fn build_network(ncfg: &NetworkConfig) -> Result<NetworkSpec, ConfigError> {
    let mut nodes = Vec::with_capacity(ncfg.nodes.len());
    for (i, nc) in ncfg.nodes.iter().enumerate() {
        let mut node = match nc.kind {
            NodeKind::Kuramoto => NodeSpec::phase_oscillator(
                nc.omega
                    .ok_or_else(|| ConfigError(format!("network.nodes[{i}].omega: required")))?,
                nc.theta0.unwrap_or(0.0),
            ),
            NodeKind::Poincare => {
                let p = models::PoincareParams {
                    alpha: nc.alpha.unwrap_or(1.0),
                    a: nc.a.unwrap_or(1.0),
                    omega: nc.omega.unwrap_or(1.0),
                    gamma: 0.0,
                    forcing: models::Forcing::Zero,
                    ..Default::default()
                };
                let x0 = nc.x0.clone().unwrap_or_else(|| vec![p.a, 0.0]);
                if x0.len() != 2 {
                    return Err(ConfigError(format!(
                        "network.nodes[{i}].x0: poincare nodes need 2 components"
                    )));
                }
                NodeSpec::poincare(&p, x0)
            }
        };
        if let Some(inp) = &nc.input {
            let (amp, freq) = (inp.amp, inp.freq);
            let dim = node.dim();
            let mut dir = vec![0.0; dim];
            dir[dim - 1] = 1.0;
            node = node.with_input(Arc::new(move |t: f64| amp * (freq * t).sin()), dir);
        }
        nodes.push(node);
    }
    let edges = ncfg
        .edges
        .iter()
        .map(|e| match e.kind {
            EdgeKind::Sine => Edge::sine(e.from, e.to, e.strength),
            EdgeKind::Diffusive => Edge::diffusive(e.from, e.to, e.strength),
        })
        .collect();
    Ok(NetworkSpec { nodes, edges })
}

fn run_aggregate(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, RunError> {
    let ncfg = cfg.network.as_ref().expect("validated");
    let net = build_network(ncfg)?;
    let n = &cfg.numerics;
    let opts = AggregateOptions {
        horizon: n.horizon,
        dt: n.dt,
        tol: n.tol,
        max_levels: ncfg.max_levels,
        validation_window: ncfg.validation_window,
        validation_threshold: ncfg.validation_threshold,
        ..Default::default()
    };
    let tree = aggregate(&net, &opts).map_err(numerical)?;
    let levels: Vec<serde_json::Value> = tree
        .levels
        .iter()
        .map(|l| {
            serde_json::json!({
                "partition": l.partition,
                "effectives": l.effectives.iter().map(|e| serde_json::json!({
                    "members": e.members,
                    "omega_hat": e.omega_hat,
                    "input_gain": e.input_gain,
                })).collect::<Vec<_>>(),
                "intrinsic": l.intrinsic,
                "coupling": l.coupling,
                "validation_error": l.validation_error,
                "validated": l.validated,
            })
        })
        .collect();
    write_json(
        out.join("tree.json"),
        &serde_json::json!({
            "levels": levels,
            "final_partition": tree.final_partition(),
            "depth": tree.depth(),
            "mixed_final_partition": tree.mixed_final_partition(),
        }),
    )?;
    Ok(vec!["tree.json".into()])
}

fn run_lyapunov(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, RunError> {
    let (sys, x0) = build_system(model_of(cfg)?)?;
    let n = &cfg.numerics;
    let dim = sys.dim();
    let mut frame = vec![0.0; dim * dim];
    for i in 0..dim {
        frame[i * dim + i] = 1.0;
    }
    // settle first, then measure
    let settle = integrate(&sys, &x0, 0.0, (0.1 * n.horizon).max(1.0), n.tol).map_err(numerical)?;
    let run = integrate_with_tangents(
        &sys,
        settle.last_state(),
        &frame,
        settle.last_time(),
        settle.last_time() + n.horizon,
        1.0,
        n.tol,
    )
    .map_err(numerical)?;
    let rates = run.rates();
    let header = ["index", "exponent"];
    let rows = rates
        .iter()
        .enumerate()
        .map(|(i, &r)| vec![i.to_string(), fmt_f(r)]);
    write_csv(out.join("lyapunov.csv"), &header, rows)?;
    Ok(vec!["lyapunov.csv".into()])
}

fn run_coherence(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, RunError> {
    let m = model_of(cfg)?;
    if !matches!(m.name.as_str(), "rossler" | "forced_rossler" | "circuit") {
        return Err(ConfigError(
            "model.name: coherence experiments need a 3-d oscillator model".into(),
        )
        .into());
    }
    let (sys, x0) = build_system(m)?;
    let n = &cfg.numerics;
    let settle = integrate(&sys, &x0, 0.0, 50.0, n.tol).map_err(numerical)?;
    let traj = integrate(
        &sys,
        settle.last_state(),
        settle.last_time(),
        settle.last_time() + n.horizon,
        n.tol,
    )
    .map_err(numerical)?;
    // half-plane section y = 0, x > 0, crossed in the rotation direction
    let sec = SectionSpec::new(vec![0.0, 1.0, 0.0], 0.0, CrossingDirection::Positive);
    let crossings: Vec<_> = section_crossings(&traj, &sec)
        .map_err(numerical)?
        .into_iter()
        .filter(|c| c.state[0] > 0.0)
        .collect();
    let times: Vec<f64> = crossings.iter().map(|c| c.t).collect();
    let rep = coherence(&times).map_err(numerical)?;

    let header = ["t", "x", "y", "z"];
    let rows = crossings.iter().map(|c| {
        vec![
            fmt_f(c.t),
            fmt_f(c.state[0]),
            fmt_f(c.state[1]),
            fmt_f(c.state[2]),
        ]
    });
    write_csv(out.join("crossings.csv"), &header, rows)?;
    write_csv(
        out.join("coherence.csv"),
        &["c", "spread", "coherence_index", "count"],
        [vec![
            fmt_f(rep.c),
            fmt_f(rep.spread),
            fmt_f(rep.coherence_index),
            rep.count.to_string(),
        ]],
    )?;
    Ok(vec!["crossings.csv".into(), "coherence.csv".into()])
}
