use super::SyncError;
use crate::ode::{integrate, SystemSpec, Trajectory};

/// Window exponents must stay below this margin for the attraction to count
/// as uniform in time.
const UNIFORM_MARGIN: f64 = -1e-3;

#[derive(Debug)]
pub enum AttractionVerdict {
    /// All candidates converge mutually with every sliding-window contraction
    /// exponent bounded away from zero; `exponent` is the weakest (largest)
    /// window exponent and `trajectory` a representative of the limit.
    Attracting {
        trajectory: Trajectory,
        exponent: f64,
    },
    /// Some window expanded or failed to contract: pullback-only or no
    /// attraction. Distinguishes non-uniform behavior from true attraction.
    NotUniformlyAttracting { window_exponents: Vec<f64> },
}

/// Forward-flow candidate states and test for a uniformly attracting
/// trajectory: mutual convergence below `tol` plus negative finite-time
/// exponents on every sliding window.
pub fn attracting_trajectory(
    sys: &SystemSpec,
    candidates: &[Vec<f64>],
    horizon: f64,
    tol: f64,
    ode_tol: f64,
) -> Result<AttractionVerdict, SyncError> {
    if candidates.len() < 2 {
        return Err(SyncError::Invalid("need at least 2 candidates".into()));
    }
    if horizon <= 0.0 {
        return Err(SyncError::Invalid("horizon must be positive".into()));
    }
    let trajectories: Vec<Trajectory> = candidates
        .iter()
        .map(|x0| integrate(sys, x0, 0.0, horizon, ode_tol))
        .collect::<Result<_, _>>()?;

    let n_windows = 10usize;
    let dim = sys.dim();
    let mut spreads = Vec::with_capacity(n_windows + 1);
    let mut buf_a = vec![0.0; dim];
    let mut buf_b = vec![0.0; dim];
    for w in 0..=n_windows {
        let t = horizon * w as f64 / n_windows as f64;
        let mut worst: f64 = 0.0;
        for i in 0..trajectories.len() {
            trajectories[i].sample_into(t, &mut buf_a)?;
            for j in i + 1..trajectories.len() {
                trajectories[j].sample_into(t, &mut buf_b)?;
                let d = buf_a
                    .iter()
                    .zip(&buf_b)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(d);
            }
        }
        spreads.push(worst.max(1e-300));
    }

    let w_len = horizon / n_windows as f64;
    let window_exponents: Vec<f64> = spreads
        .windows(2)
        .map(|s| (s[1] / s[0]).ln() / w_len)
        .collect();

    let uniform = window_exponents.iter().all(|&e| e < UNIFORM_MARGIN);
    let converged = *spreads.last().unwrap() < tol;
    if uniform && converged {
        Ok(AttractionVerdict::Attracting {
            trajectory: trajectories.into_iter().next().unwrap(),
            exponent: window_exponents.iter().cloned().fold(f64::MIN, f64::max),
        })
    } else {
        Ok(AttractionVerdict::NotUniformlyAttracting { window_exponents })
    }
}
