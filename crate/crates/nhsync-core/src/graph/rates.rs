//! Empirical normal-hyperbolicity diagnostics.

use super::{GraphError, PhaseNormalSystem, TorusGraph};
use crate::linalg::matvec;
use crate::ode::{integrate_rhs, StepperOpts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Tangential rates below this floor count as neutral in the NH ratio.
const RATE_FLOOR: f64 = 1e-3;

/// Empirical normal and tangential rates on a (near-)invariant graph.
/// `lambda_n > 0` means the normal dynamics contracts; `ratio > 1` means the
/// graph is empirically normally hyperbolic.
#[derive(Debug, Clone)]
pub struct NhRates {
    /// Normal contraction rate (slowest over samples; positive = contracting).
    pub lambda_n: f64,
    /// Max tangential expansion rate over samples.
    pub lambda_t_max: f64,
    /// `lambda_n / max(lambda_t_max, floor)`.
    pub ratio: f64,
    pub samples: usize,
}

/// Sample on-graph trajectories and measure the normal variational growth
/// (via `R_r`) and the tangential variational growth (via `Theta_theta +
/// Theta_r d(rho)/d(theta)`) over `horizon`.
pub fn nh_rates(
    rho: &TorusGraph,
    sys: &PhaseNormalSystem,
    sample_count: usize,
    horizon: f64,
    ode_tol: f64,
    seed: u64,
) -> Result<NhRates, GraphError> {
    if sample_count == 0 || horizon <= 0.0 {
        return Err(GraphError::InvalidInput(
            "need samples >= 1 and positive horizon".into(),
        ));
    }
    let m = sys.phase_dim();
    let p = sys.normal_dim();
    let freqs = sys.forcing_frequencies().to_vec();
    let nf = freqs.len();
    if rho.torus_dim() != m + nf || rho.components() != p || p == 0 {
        return Err(GraphError::InvalidInput(
            "graph/system shape mismatch".into(),
        ));
    }

    let mdim = m + nf;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..sample_count)
        .map(|_| (0..mdim).map(|_| rng.gen::<f64>() * crate::TAU).collect())
        .collect();

    let per_sample: Vec<Result<(f64, f64), GraphError>> = starts
        .par_iter()
        .map(|angles| sample_rates(rho, sys, angles, horizon, ode_tol))
        .collect();

    let mut lambda_n = f64::INFINITY;
    let mut lambda_t_max = f64::NEG_INFINITY;
    for r in per_sample {
        let (ln_, lt) = r?;
        lambda_n = lambda_n.min(ln_);
        lambda_t_max = lambda_t_max.max(lt);
    }
    Ok(NhRates {
        lambda_n,
        lambda_t_max,
        ratio: lambda_n / lambda_t_max.max(RATE_FLOOR),
        samples: sample_count,
    })
}

/// One on-graph trajectory with a tangential and a normal variational vector,
/// renormalized every unit of time (Benettin-style).
fn sample_rates(
    rho: &TorusGraph,
    sys: &PhaseNormalSystem,
    start: &[f64],
    horizon: f64,
    ode_tol: f64,
) -> Result<(f64, f64), GraphError> {
    let m = sys.phase_dim();
    let p = sys.normal_dim();
    let freqs = sys.forcing_frequencies().to_vec();
    let nf = freqs.len();
    let (theta0, phi0) = start.split_at(m);

    // Augmented state: theta, tangential u (m), normal v (p).
    let mut z = vec![0.0; m + m + p];
    z[..m].copy_from_slice(theta0);
    let un = (m as f64).sqrt().recip();
    for i in 0..m {
        z[m + i] = un;
    }
    let vn = (p as f64).sqrt().recip();
    for i in 0..p {
        z[2 * m + i] = vn;
    }

    let mut log_u = 0.0;
    let mut log_v = 0.0;
    let chunk = 1.0f64.min(horizon);
    let n_chunks = ((horizon / chunk).round() as usize).max(1);
    let dt = horizon / n_chunks as f64;

    let mut phib = vec![0.0; nf];
    let mut ang = vec![0.0; m + nf];
    let mut rbuf = vec![0.0; p];
    let mut tt = vec![0.0; m * m];
    let mut tr = vec![0.0; m * p];
    let mut rr = vec![0.0; p * p];
    let mut sig = vec![0.0; p * m];
    let mut a = vec![0.0; m * m];
    let mut col = vec![0.0; p];
    let mut t = 0.0;
    for _ in 0..n_chunks {
        let mut rhs = |zz: &[f64], tau: f64, out: &mut [f64]| {
            for k in 0..nf {
                phib[k] = phi0[k] + freqs[k] * tau;
            }
            let theta = &zz[..m];
            ang[..m].copy_from_slice(theta);
            ang[m..].copy_from_slice(&phib);
            rho.eval(&ang, &mut rbuf);
            sys.theta_dot(theta, &rbuf, &phib, &mut out[..m]);
            sys.d_theta_d_theta(theta, &rbuf, &phib, &mut tt);
            sys.d_theta_d_r(theta, &rbuf, &phib, &mut tr);
            sys.d_r_d_r(theta, &rbuf, &phib, &mut rr);
            // slope of the graph itself: sigma = d(rho)/d(theta), p x m
            for d in 0..m {
                rho.eval_partial(&ang, d, &mut col);
                for i in 0..p {
                    sig[i * m + d] = col[i];
                }
            }
            // a = Theta_theta + Theta_r sigma
            for i in 0..m {
                for j in 0..m {
                    let mut s = tt[i * m + j];
                    for q in 0..p {
                        s += tr[i * p + q] * sig[q * m + j];
                    }
                    a[i * m + j] = s;
                }
            }
            matvec(&a, &zz[m..2 * m], m, m, &mut out[m..2 * m]);
            matvec(&rr, &zz[2 * m..], p, p, &mut out[2 * m..]);
        };
        let opts = StepperOpts {
            tol: ode_tol,
            store_dense: false,
            ..Default::default()
        };
        let run = integrate_rhs(&mut rhs, &z, t, t + dt, &opts)?;
        z.copy_from_slice(run.last_state());
        t += dt;
        let nu = norm(&z[m..2 * m]);
        let nv = norm(&z[2 * m..]);
        if nu <= 0.0 || nv <= 0.0 {
            return Err(GraphError::InvalidInput(
                "variational vector collapsed".into(),
            ));
        }
        log_u += nu.ln();
        log_v += nv.ln();
        for x in &mut z[m..2 * m] {
            *x /= nu;
        }
        for x in &mut z[2 * m..] {
            *x /= nv;
        }
    }
    Ok((-log_v / horizon, log_u / horizon))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Max instantaneous tangential expansion rate over grid nodes and a set of
/// forcing times (Gershgorin row bound of the on-graph tangential Jacobian).
pub fn max_instantaneous_tangential_rate(rho: &TorusGraph, sys: &PhaseNormalSystem) -> f64 {
    let m = sys.phase_dim();
    let p = sys.normal_dim();
    let nf = sys.forcing_frequencies().len();
    let mut ang = vec![0.0; m + nf];
    let mut tt = vec![0.0; m * m];
    let mut tr = vec![0.0; m * p];
    let mut sig = vec![0.0; p * m];
    let mut col = vec![0.0; p];
    let mut worst = f64::NEG_INFINITY;
    for node in 0..rho.node_count() {
        rho.angles_of(node, &mut ang);
        let (theta, phi) = ang.split_at(m);
        let r = rho.node_value(node);
        sys.d_theta_d_theta(theta, r, phi, &mut tt);
        sys.d_theta_d_r(theta, r, phi, &mut tr);
        for d in 0..m {
            rho.eval_partial(&ang, d, &mut col);
            for i in 0..p {
                sig[i * m + d] = col[i];
            }
        }
        for i in 0..m {
            let mut row = 0.0;
            for j in 0..m {
                let mut v = tt[i * m + j];
                for q in 0..p {
                    v += tr[i * p + q] * sig[q * m + j];
                }
                row += if i == j { v } else { v.abs() };
            }
            worst = worst.max(row);
        }
    }
    worst
}

/// The rough persistence bound for the forced Poincare oscillator: the
/// invariant cylinder survives for forcing amplitudes up to about
/// `alpha a^2 / 2`.
pub fn persistence_threshold(alpha: f64, a: f64) -> Result<f64, GraphError> {
    if !(alpha > 0.0 && a > 0.0) {
        return Err(GraphError::InvalidInput(
            "alpha and a must be positive".into(),
        ));
    }
    Ok(0.5 * alpha * a * a)
}

/// Max invariance defect over random on-graph points: compares the normal
/// velocity `R` with the advection of the graph, `sigma Theta + d(rho)/d(phi)
/// . omega_f`. A true invariant graph has zero residual.
pub fn invariance_residual(
    rho: &TorusGraph,
    sys: &PhaseNormalSystem,
    sample_count: usize,
    seed: u64,
) -> f64 {
    let m = sys.phase_dim();
    let p = sys.normal_dim();
    let freqs = sys.forcing_frequencies();
    let nf = freqs.len();
    let mdim = m + nf;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ang = vec![0.0; mdim];
    let mut rbuf = vec![0.0; p];
    let mut rvel = vec![0.0; p];
    let mut thvel = vec![0.0; m];
    let mut col = vec![0.0; p];
    let mut worst: f64 = 0.0;
    for _ in 0..sample_count {
        for a in ang.iter_mut() {
            *a = rng.gen::<f64>() * crate::TAU;
        }
        let (theta, phi) = ang.split_at(m);
        rho.eval(&ang, &mut rbuf);
        sys.r_dot(theta, &rbuf, phi, &mut rvel);
        sys.theta_dot(theta, &rbuf, phi, &mut thvel);
        let mut residual = rvel.clone();
        for d in 0..m {
            rho.eval_partial(&ang, d, &mut col);
            for i in 0..p {
                residual[i] -= col[i] * thvel[d];
            }
        }
        for (k, &w) in freqs.iter().enumerate() {
            rho.eval_partial(&ang, m + k, &mut col);
            for i in 0..p {
                residual[i] -= col[i] * w;
            }
        }
        for v in &residual {
            worst = worst.max(v.abs());
        }
    }
    worst
}
