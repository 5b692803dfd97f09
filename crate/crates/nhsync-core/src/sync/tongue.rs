use super::{detect_mn_locking, rotation_number, LockRatio, PhaseSeries, SyncError, SyncReport};
use crate::ode::{integrate, SystemSpec};
use rayon::prelude::*;
use std::sync::Arc;

/// One member of a scanned family: a system plus two phase charts whose
/// locking is tested.
pub struct ScanSystem {
    pub sys: SystemSpec,
    pub x0: Vec<f64>,
    pub phase_a: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
    pub phase_b: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
}

#[derive(Debug, Clone)]
pub struct ScanBudget {
    pub horizon: f64,
    pub dt: f64,
    pub tol: f64,
    pub discard_fraction: f64,
    pub m_max: u32,
    pub n_max: u32,
    pub bound: f64,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget {
            horizon: 400.0,
            dt: 0.25,
            tol: 1e-8,
            discard_fraction: super::DEFAULT_DISCARD,
            m_max: 8,
            n_max: 8,
            bound: super::DEFAULT_LOCK_BOUND,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub delta: f64,
    pub k: f64,
    /// Per-point failures are recorded, not fatal.
    pub report: Result<SyncReport, String>,
}

impl ScanPoint {
    pub fn locking(&self) -> Option<LockRatio> {
        self.report.as_ref().ok().and_then(|r| r.locking)
    }
}

/// Verdict grid over `(delta, k)`; row-major with `delta` fastest.
#[derive(Debug, Clone)]
pub struct TongueGrid {
    pub deltas: Vec<f64>,
    pub ks: Vec<f64>,
    pub points: Vec<ScanPoint>,
}

impl TongueGrid {
    pub fn point(&self, i_delta: usize, i_k: usize) -> &ScanPoint {
        &self.points[i_k * self.deltas.len() + i_delta]
    }
}

/// Sweep a parameterized family over a `(delta, k)` grid, running the locking
/// detector at every point. Embarrassingly parallel.
pub fn arnold_tongue_scan(
    family: &(dyn Fn(f64, f64) -> ScanSystem + Sync),
    delta_range: (f64, f64),
    k_range: (f64, f64),
    resolution: (usize, usize),
    budget: &ScanBudget,
) -> Result<TongueGrid, SyncError> {
    let (nd, nk) = resolution;
    if nd < 2 || nk < 2 || nd > 256 || nk > 256 {
        return Err(SyncError::Invalid(
            "resolution must be between 2x2 and 256x256".into(),
        ));
    }
    let deltas: Vec<f64> = (0..nd)
        .map(|i| delta_range.0 + (delta_range.1 - delta_range.0) * i as f64 / (nd - 1) as f64)
        .collect();
    let ks: Vec<f64> = (0..nk)
        .map(|i| k_range.0 + (k_range.1 - k_range.0) * i as f64 / (nk - 1) as f64)
        .collect();

    let points: Vec<ScanPoint> = ks
        .par_iter()
        .flat_map_iter(|&k| deltas.iter().map(move |&d| (d, k)))
        .map(|(delta, k)| ScanPoint {
            delta,
            k,
            report: scan_point(family, delta, k, budget).map_err(|e| e.to_string()),
        })
        .collect();

    Ok(TongueGrid { deltas, ks, points })
}

fn scan_point(
    family: &(dyn Fn(f64, f64) -> ScanSystem + Sync),
    delta: f64,
    k: f64,
    budget: &ScanBudget,
) -> Result<SyncReport, SyncError> {
    let member = family(delta, k);
    let traj = integrate(&member.sys, &member.x0, 0.0, budget.horizon, budget.tol)?;
    let ts = traj.uniform_grid(budget.dt);
    let mut pa = Vec::with_capacity(ts.len());
    let mut pb = Vec::with_capacity(ts.len());
    let mut buf = vec![0.0; member.sys.dim()];
    for &t in &ts {
        traj.sample_into(t, &mut buf)?;
        pa.push((member.phase_a)(&buf, t));
        pb.push((member.phase_b)(&buf, t));
    }
    let series_a = PhaseSeries::single(ts.clone(), pa)?;
    let series_b = PhaseSeries::single(ts, pb)?;
    let ra = rotation_number(&series_a, 0, budget.discard_fraction)?;
    let rb = rotation_number(&series_b, 0, budget.discard_fraction)?;
    let locking = detect_mn_locking(
        &series_a,
        &series_b,
        budget.m_max,
        budget.n_max,
        budget.bound,
        budget.discard_fraction,
    )?;
    Ok(SyncReport {
        rotation_numbers: vec![ra, rb],
        locking,
        cluster_count: None,
        lyapunov: vec![],
    })
}

/// The Adler family in forced-oscillator form: a reference phase advancing at
/// `omega_ref` and an oscillator phase `theta = psi + omega_ref t` where
/// `psi' = delta - k sin(psi)`. Locked iff `|delta| <= k`, with drift
/// rotation number `sqrt(delta^2 - k^2) / 2 pi` outside.
pub fn adler_scan_family(omega_ref: f64) -> impl Fn(f64, f64) -> ScanSystem + Sync {
    move |delta, k| ScanSystem {
        sys: crate::models::adler(delta, k),
        x0: vec![0.3],
        phase_a: Arc::new(move |x, t| x[0] + omega_ref * t),
        phase_b: Arc::new(move |_x, t| omega_ref * t),
    }
}
