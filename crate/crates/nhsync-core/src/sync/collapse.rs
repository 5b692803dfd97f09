use super::SyncError;
use crate::graph::{PhaseNormalSystem, TorusGraph};
use crate::ode::{integrate_rhs, StepperOpts};
use crate::TAU;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct CollapseOptions {
    /// Circular gap (radians) separating clusters of final phases.
    pub gap_threshold: f64,
    /// Rotates the seeded ring.
    pub ring_offset: f64,
    pub ode_tol: f64,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        CollapseOptions {
            gap_threshold: 0.5,
            ring_offset: 0.0,
            ode_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CollapseReport {
    /// 0 means the ring survived (no collapse, a circle's worth of
    /// solutions); `j >= 1` means the fiber collapsed onto `j` attracting
    /// trajectory bundles.
    pub cluster_count: usize,
    pub cluster_phases: Vec<f64>,
    pub final_phases: Vec<f64>,
}

/// Seed `k` equally spaced phases on the fiber `(phi0, t0)` of the graph,
/// flow each on-graph for `horizon`, and cluster the final phases.
pub fn phase_collapse(
    sys: &PhaseNormalSystem,
    graph: Option<&TorusGraph>,
    phi0: &[f64],
    t0: f64,
    k: usize,
    horizon: f64,
    opts: &CollapseOptions,
) -> Result<CollapseReport, SyncError> {
    if k < 32 {
        return Err(SyncError::Invalid("ring size must be at least 32".into()));
    }
    if sys.phase_dim() != 1 {
        return Err(SyncError::Invalid(
            "ring collapse needs a single oscillator phase".into(),
        ));
    }
    let p = sys.normal_dim();
    if p > 0 && graph.is_none() {
        return Err(SyncError::Invalid(
            "a graph is required when the system has normal directions".into(),
        ));
    }
    let freqs = sys.forcing_frequencies().to_vec();
    let nf = freqs.len();
    if phi0.len() != nf {
        return Err(SyncError::Invalid(
            "fiber has wrong number of phases".into(),
        ));
    }
    // Fold t0 into the forcing phases.
    let phi_start: Vec<f64> = phi0
        .iter()
        .zip(&freqs)
        .map(|(&p0, &w)| p0 + w * t0)
        .collect();

    let finals: Vec<Result<f64, SyncError>> = (0..k)
        .into_par_iter()
        .map(|j| {
            let theta0 = [TAU * j as f64 / k as f64 + opts.ring_offset];
            let mut phib = vec![0.0; nf];
            let mut ang = vec![0.0; 1 + nf];
            let mut rbuf = vec![0.0; p];
            let mut rhs = |th: &[f64], tau: f64, out: &mut [f64]| {
                for q in 0..nf {
                    phib[q] = phi_start[q] + freqs[q] * tau;
                }
                if let Some(g) = graph {
                    ang[0] = th[0];
                    ang[1..].copy_from_slice(&phib);
                    g.eval(&ang, &mut rbuf);
                    if !sys.r_in_domain(&rbuf) {
                        out.fill(f64::NAN);
                        return;
                    }
                }
                sys.theta_dot(th, &rbuf, &phib, out);
            };
            let sopts = StepperOpts {
                tol: opts.ode_tol,
                store_dense: false,
                ..Default::default()
            };
            let run = integrate_rhs(&mut rhs, &theta0, 0.0, horizon, &sopts)?;
            Ok(run.last_state()[0])
        })
        .collect();

    let mut final_phases = Vec::with_capacity(k);
    for f in finals {
        final_phases.push(f?.rem_euclid(TAU));
    }

    let mut sorted = final_phases.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // circular gaps between consecutive sorted phases
    let mut gap_after = vec![0.0; k];
    for i in 0..k {
        let next = sorted[(i + 1) % k] + if i + 1 == k { TAU } else { 0.0 };
        gap_after[i] = next - sorted[i];
    }
    let large: Vec<usize> = (0..k)
        .filter(|&i| gap_after[i] > opts.gap_threshold)
        .collect();
    let cluster_count = large.len();

    let mut cluster_phases = Vec::new();
    if cluster_count > 0 {
        // each cluster runs from just after one large gap to the next
        for w in 0..cluster_count {
            let begin = (large[w] + 1) % k;
            let end = large[(w + 1) % cluster_count]; // inclusive
            let mut sum_sin = 0.0;
            let mut sum_cos = 0.0;
            let mut i = begin;
            loop {
                sum_sin += sorted[i].sin();
                sum_cos += sorted[i].cos();
                if i == end {
                    break;
                }
                i = (i + 1) % k;
            }
            cluster_phases.push(sum_sin.atan2(sum_cos).rem_euclid(TAU));
        }
        cluster_phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    Ok(CollapseReport {
        cluster_count,
        cluster_phases,
        final_phases,
    })
}
