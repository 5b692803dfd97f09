use super::{find_clusters, simulate_network, sync_matrix, NetworkError, NetworkSpec, NodeSpec};
use crate::linalg::least_squares;
use crate::sync::{rotation_number, PhaseSeries};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct AggregateOptions {
    /// Fit-simulation length per level (validation window excluded).
    pub horizon: f64,
    pub dt: f64,
    pub tol: f64,
    /// Transient fraction discarded before clustering and fitting.
    pub discard: f64,
    pub lock_bound: f64,
    pub m_max: u32,
    pub n_max: u32,
    pub max_levels: usize,
    /// Held-out window over which each reduced network is checked against the
    /// full collective phases.
    pub validation_window: f64,
    pub validation_threshold: f64,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions {
            horizon: 350.0,
            dt: 0.05,
            tol: 1e-8,
            discard: crate::sync::DEFAULT_DISCARD,
            lock_bound: crate::sync::DEFAULT_LOCK_BOUND,
            m_max: 6,
            n_max: 6,
            max_levels: 4,
            validation_window: 50.0,
            validation_threshold: 0.15,
        }
    }
}

/// Fitted phase model of a 1:1 locked cluster.
#[derive(Debug, Clone)]
pub struct EffectiveOscillator {
    /// Member indices (original node labels).
    pub members: Vec<usize>,
    /// Rotation number of the collective phase times 2 pi.
    pub omega_hat: f64,
    /// Linear response of the collective phase velocity to the aggregate
    /// external input.
    pub input_gain: f64,
}

/// One pass of cluster merging.
#[derive(Debug, Clone)]
pub struct AggregationLevel {
    /// Partition of the original node set.
    pub partition: Vec<Vec<usize>>,
    pub effectives: Vec<EffectiveOscillator>,
    /// Joint-fit intrinsic frequency per cluster (regression intercept).
    pub intrinsic: Vec<f64>,
    /// Fitted inter-cluster first-harmonic couplings: `coupling[c][d]`
    /// multiplies `sin(theta_d - theta_c)` in cluster `c`'s equation.
    pub coupling: Vec<Vec<f64>>,
    pub validation_error: Option<f64>,
    pub validated: bool,
}

/// The hierarchy of merges; `levels[0]` is the leaf partition (one cluster
/// per original node) and every later level coarsens the one before.
#[derive(Debug, Clone)]
pub struct AggregationTree {
    pub levels: Vec<AggregationLevel>,
}

impl AggregationTree {
    pub fn final_partition(&self) -> &[Vec<usize>] {
        &self.levels.last().unwrap().partition
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Every level must coarsen (or equal) the previous one, with the
    /// original nodes as leaves.
    pub fn is_coarsening_chain(&self) -> bool {
        for w in self.levels.windows(2) {
            for fine in &w[0].partition {
                let found = w[1]
                    .partition
                    .iter()
                    .any(|coarse| fine.iter().all(|i| coarse.contains(i)));
                if !found {
                    return false;
                }
            }
        }
        self.levels[0].partition.iter().all(|c| c.len() == 1)
    }

    /// A chimera-style outcome: the final partition mixes multi-node clusters
    /// with singletons that never merged.
    pub fn mixed_final_partition(&self) -> bool {
        let p = self.final_partition();
        p.iter().any(|c| c.len() > 1) && p.iter().any(|c| c.len() == 1)
    }
}

/// Circular-mean collective phase of a cluster, unwrapped along the series.
pub fn collective_phases(phases: &PhaseSeries, cluster: &[usize]) -> Vec<f64> {
    let n = phases.len();
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for k in 0..n {
        let mut s = 0.0;
        let mut c = 0.0;
        for &i in cluster {
            let th = phases.component(i)[k];
            s += th.sin();
            c += th.cos();
        }
        let wrapped = s.atan2(c);
        let x = if k == 0 {
            wrapped
        } else {
            wrapped + crate::TAU * ((prev - wrapped) / crate::TAU).round()
        };
        prev = x;
        out.push(x);
    }
    out
}

fn pair_variation(a: &[f64], b: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    0.5 * (hi - lo)
}

/// Fit a single effective oscillator to a 1:1 locked cluster: collective
/// phase = circular mean, `omega_hat` from its rotation number, input
/// response by least squares against the cluster's aggregate external input.
/// Refuses clusters that are not locked over the window.
pub fn effective_oscillator(
    net: &NetworkSpec,
    cluster: &[usize],
    phases: &PhaseSeries,
    discard: f64,
    lock_bound: f64,
) -> Result<EffectiveOscillator, NetworkError> {
    if cluster.is_empty() {
        return Err(NetworkError::Invalid("empty cluster".into()));
    }
    let start = ((phases.len() as f64 * discard) as usize).min(phases.len() - 2);
    for (ai, &i) in cluster.iter().enumerate() {
        for &j in &cluster[ai + 1..] {
            let v = pair_variation(&phases.component(i)[start..], &phases.component(j)[start..]);
            if v >= lock_bound {
                return Err(NetworkError::NotLocked(format!(
                    "nodes {i} and {j} drift (variation {v:.3})"
                )));
            }
        }
    }

    let collective = collective_phases(phases, cluster);
    let ps = PhaseSeries::single(phases.times().to_vec(), collective.clone())?;
    let (rho, _) = rotation_number(&ps, 0, discard)?;
    let omega_hat = rho * crate::TAU;

    let mut input_gain = 0.0;
    let signals: Vec<_> = cluster
        .iter()
        .filter_map(|&i| net.nodes[i].input.as_ref().map(|inp| inp.signal.clone()))
        .collect();
    if !signals.is_empty() {
        let ts = phases.times();
        let dt = ts[1] - ts[0];
        let mut design = Vec::new();
        let mut y = Vec::new();
        for k in (start + 1).max(1)..phases.len() - 1 {
            let dtheta = (collective[k + 1] - collective[k - 1]) / (2.0 * dt);
            let u: f64 = signals.iter().map(|s| s(ts[k])).sum::<f64>() / cluster.len() as f64;
            design.push(1.0);
            design.push(u);
            y.push(dtheta);
        }
        if let Some(beta) = least_squares(&design, &y, 2) {
            input_gain = beta[1];
        }
    }

    Ok(EffectiveOscillator {
        members: cluster.to_vec(),
        omega_hat,
        input_gain,
    })
}

/// A reduced network of effective phase oscillators plus the fit that
/// produced it.
#[derive(Debug, Clone)]
pub struct ReducedNetwork {
    pub net: NetworkSpec,
    pub effectives: Vec<EffectiveOscillator>,
    pub intrinsic: Vec<f64>,
    pub coupling: Vec<Vec<f64>>,
    /// Collective phase value of each cluster at every sample of the fit run.
    pub collective: Vec<Vec<f64>>,
}

/// Replace each cluster by one phase oscillator; inter-cluster couplings are
/// re-fitted as first-harmonic phase-difference terms by least squares of the
/// collective phase velocities.
pub fn reduce_network(
    net: &NetworkSpec,
    partition: &[Vec<usize>],
    phases: &PhaseSeries,
    discard: f64,
    lock_bound: f64,
) -> Result<ReducedNetwork, NetworkError> {
    let c_count = partition.len();
    let mut effectives = Vec::with_capacity(c_count);
    let mut collective = Vec::with_capacity(c_count);
    for cluster in partition {
        effectives.push(effective_oscillator(
            net, cluster, phases, discard, lock_bound,
        )?);
        collective.push(collective_phases(phases, cluster));
    }

    let ts = phases.times();
    let dt = ts[1] - ts[0];
    let start = ((phases.len() as f64 * discard) as usize).min(phases.len() - 2);

    // Aggregate input signal per cluster (mean of member signals).
    let cluster_signals: Vec<Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>> = partition
        .iter()
        .map(|cluster| {
            let sigs: Vec<_> = cluster
                .iter()
                .filter_map(|&i| net.nodes[i].input.as_ref().map(|inp| inp.signal.clone()))
                .collect();
            if sigs.is_empty() {
                None
            } else {
                let count = cluster.len() as f64;
                let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> =
                    Arc::new(move |t| sigs.iter().map(|s| s(t)).sum::<f64>() / count);
                Some(f)
            }
        })
        .collect();

    // Joint fit per cluster: dtheta_c/dt ~ omega + gain u_c + sum_d k[c][d]
    // sin(theta_d - theta_c).
    let mut intrinsic = vec![0.0; c_count];
    let mut gains = vec![0.0; c_count];
    let mut coupling = vec![vec![0.0; c_count]; c_count];
    for c in 0..c_count {
        let others: Vec<usize> = (0..c_count).filter(|&d| d != c).collect();
        let has_input = cluster_signals[c].is_some();
        let p = 1 + usize::from(has_input) + others.len();
        let mut design = Vec::new();
        let mut y = Vec::new();
        for k in (start + 1).max(1)..phases.len() - 1 {
            y.push((collective[c][k + 1] - collective[c][k - 1]) / (2.0 * dt));
            design.push(1.0);
            if let Some(sig) = &cluster_signals[c] {
                design.push(sig(ts[k]));
            }
            for &d in &others {
                design.push((collective[d][k] - collective[c][k]).sin());
            }
        }
        let beta = least_squares(&design, &y, p)
            .ok_or_else(|| NetworkError::Invalid("degenerate coupling fit".into()))?;
        intrinsic[c] = beta[0];
        let mut idx = 1;
        if has_input {
            gains[c] = beta[idx];
            idx += 1;
        }
        for (slot, &d) in others.iter().enumerate() {
            coupling[c][d] = beta[idx + slot];
        }
    }

    let mut nodes = Vec::with_capacity(c_count);
    for c in 0..c_count {
        let mut node = NodeSpec::phase_oscillator(intrinsic[c], collective[c][0]);
        if let Some(sig) = &cluster_signals[c] {
            let g = gains[c];
            let sig = sig.clone();
            node = node.with_input(Arc::new(move |t| g * sig(t)), vec![1.0]);
        }
        nodes.push(node);
    }
    let mut edges = Vec::new();
    for c in 0..c_count {
        for d in 0..c_count {
            if c != d {
                edges.push(super::Edge::sine(d, c, coupling[c][d]));
            }
        }
    }
    Ok(ReducedNetwork {
        net: NetworkSpec { nodes, edges },
        effectives,
        intrinsic,
        coupling,
        collective,
    })
}

fn singleton_partition(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![i]).collect()
}

fn lift_partition(mapping: &[Vec<usize>], local: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = local
        .iter()
        .map(|cluster| {
            let mut members: Vec<usize> = cluster
                .iter()
                .flat_map(|&i| mapping[i].iter().copied())
                .collect();
            members.sort_unstable();
            members
        })
        .collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Hierarchical aggregation: simulate, find 1:1 locked clusters, replace each
/// by an effective oscillator, validate the reduction on a held-out window,
/// repeat on the reduced network until the partition stabilizes.
pub fn aggregate(
    net: &NetworkSpec,
    opts: &AggregateOptions,
) -> Result<AggregationTree, NetworkError> {
    net.validate()?;
    let n = net.n_nodes();
    let mut levels = vec![AggregationLevel {
        partition: singleton_partition(n),
        effectives: vec![],
        intrinsic: vec![],
        coupling: vec![],
        validation_error: None,
        validated: true,
    }];
    let mut current = net.clone();
    let mut mapping = singleton_partition(n);

    for _ in 1..=opts.max_levels {
        let total = opts.horizon + opts.validation_window;
        let run = simulate_network(&current, None, 0.0, total, opts.dt, opts.tol)?;
        let ts = run.phases.times();
        let val_start = ts.partition_point(|&t| t < opts.horizon - 1e-9);

        let fit_phases = run.phases.window(0, val_start + 1)?;
        let matrix = sync_matrix(
            &fit_phases,
            opts.m_max,
            opts.n_max,
            opts.lock_bound,
            opts.discard,
        );
        let local = find_clusters(&matrix, Some((1, 1)));
        let merged = local.iter().any(|c| c.len() > 1);
        let lifted = lift_partition(&mapping, &local);

        if !merged {
            // Partition stabilized; record the no-merge pass and stop.
            levels.push(AggregationLevel {
                partition: lifted,
                effectives: vec![],
                intrinsic: vec![],
                coupling: vec![],
                validation_error: None,
                validated: true,
            });
            break;
        }

        let reduced = reduce_network(&current, &local, &fit_phases, opts.discard, opts.lock_bound)?;

        // Validate the reduction on the held-out tail.
        let t0 = ts[val_start];
        let full_tail = run.phases.window(val_start, ts.len())?;
        let x0: Vec<f64> = local
            .iter()
            .map(|cluster| collective_phases(&full_tail, cluster)[0])
            .collect();
        let val_run = simulate_network(&reduced.net, Some(&x0), t0, total - t0, opts.dt, opts.tol)?;
        let mut verr: f64 = 0.0;
        for (c, cluster) in local.iter().enumerate() {
            let truth = collective_phases(&full_tail, cluster);
            for (k, &t) in full_tail.times().iter().enumerate() {
                let red = val_run.trajectory.sample(t)?[c];
                verr = verr.max((red - truth[k]).abs());
            }
        }

        // Lift effectives to original labels.
        let effectives: Vec<EffectiveOscillator> = reduced
            .effectives
            .iter()
            .zip(&lifted)
            .map(|(e, members)| EffectiveOscillator {
                members: members.clone(),
                omega_hat: e.omega_hat,
                input_gain: e.input_gain,
            })
            .collect();

        levels.push(AggregationLevel {
            partition: lifted.clone(),
            effectives,
            intrinsic: reduced.intrinsic.clone(),
            coupling: reduced.coupling.clone(),
            validation_error: Some(verr),
            validated: verr <= opts.validation_threshold,
        });

        mapping = lifted;
        current = reduced.net;
        if current.n_nodes() <= 1 {
            break;
        }
    }

    Ok(AggregationTree { levels })
}
