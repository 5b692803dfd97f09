//! The graph transform and its companions.
//!
//! One transform step maps a candidate graph `rho` to `T rho`: for every grid
//! node, flow the on-graph phase dynamics backward over a window, then
//! integrate the normal equation forward along that phase history starting
//! from the graph at the window's far end. For attracting normal dynamics the
//! forward pass realizes the unique bounded solution up to `O(exp(-lambda_N
//! T_w))`, so the fixed point of `T` is the invariant graph.

use super::{GraphError, PhaseNormalSystem, TorusGraph};
use crate::ode::{integrate_rhs, OdeError, StepperOpts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cell::Cell;

#[derive(Debug, Clone)]
pub struct GraphConfig {
    /// Backward window; `None` picks `20 / lambda_N` from the initial guess.
    pub window: Option<f64>,
    /// Sup-norm convergence tolerance for the fixed-point iteration.
    pub tol: f64,
    pub max_iter: usize,
    /// Local tolerance of the inner integrations.
    pub ode_tol: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            window: None,
            tol: 1e-7,
            max_iter: 30,
            ode_tol: 1e-8,
        }
    }
}

/// Converged (or last) iterate plus per-iteration diagnostics.
#[derive(Debug, Clone)]
pub struct GraphSolution {
    pub graph: TorusGraph,
    /// Sup-norm change of each iteration.
    pub deltas: Vec<f64>,
    /// Geometric-decay fit of the deltas.
    pub contraction_factor: Option<f64>,
    pub converged: bool,
    pub window: f64,
    pub iterations: usize,
}

fn check_shapes(rho: &TorusGraph, sys: &PhaseNormalSystem) -> Result<(), GraphError> {
    if sys.normal_dim() == 0 {
        return Err(GraphError::InvalidInput(
            "graph transform needs a normal direction".into(),
        ));
    }
    if rho.torus_dim() != sys.torus_dim() {
        return Err(GraphError::InvalidInput(format!(
            "graph torus dim {} != system torus dim {}",
            rho.torus_dim(),
            sys.torus_dim()
        )));
    }
    if rho.components() != sys.normal_dim() {
        return Err(GraphError::InvalidInput(format!(
            "graph components {} != normal dim {}",
            rho.components(),
            sys.normal_dim()
        )));
    }
    if !rho.all_finite() {
        return Err(GraphError::InvalidInput(
            "graph has non-finite values".into(),
        ));
    }
    Ok(())
}

fn escalate(e: OdeError, escaped: &Cell<bool>) -> GraphError {
    match e {
        OdeError::NanFailure { t } | OdeError::IntegrationFailure { t } if escaped.get() => {
            GraphError::ChartEscape { t }
        }
        other => GraphError::Ode(other),
    }
}

/// Pointwise graph transform: the value of `T rho` at arbitrary torus angles.
fn transform_at(
    sys: &PhaseNormalSystem,
    rho: &TorusGraph,
    angles: &[f64],
    window: f64,
    ode_tol: f64,
) -> Result<Vec<f64>, GraphError> {
    let m = sys.phase_dim();
    let p = sys.normal_dim();
    let freqs = sys.forcing_frequencies();
    let nf = freqs.len();
    let (theta0, phi0) = angles.split_at(m);
    let escaped = Cell::new(false);

    // Step 1: on-graph phase history, backward over [-window, 0].
    let mut ang = vec![0.0; m + nf];
    let mut rbuf = vec![0.0; p];
    let mut phib = vec![0.0; nf];
    let mut rhs_theta = |th: &[f64], tau: f64, out: &mut [f64]| {
        for k in 0..nf {
            phib[k] = phi0[k] + freqs[k] * tau;
        }
        ang[..m].copy_from_slice(th);
        ang[m..].copy_from_slice(&phib);
        rho.eval(&ang, &mut rbuf);
        if !sys.r_in_domain(&rbuf) {
            escaped.set(true);
            out.fill(f64::NAN);
            return;
        }
        sys.theta_dot(th, &rbuf, &phib, out);
    };
    let opts = StepperOpts {
        tol: ode_tol,
        ..Default::default()
    };
    let path = integrate_rhs(&mut rhs_theta, theta0, 0.0, -window, &opts)
        .map_err(|e| escalate(e, &escaped))?;

    // Step 2: seed the normal pass on the graph at the far end...
    let theta_far = path.state(0);
    let mut ang0 = vec![0.0; m + nf];
    ang0[..m].copy_from_slice(theta_far);
    for k in 0..nf {
        ang0[m + k] = phi0[k] - freqs[k] * window;
    }
    let mut r0 = vec![0.0; p];
    rho.eval(&ang0, &mut r0);
    if !sys.r_in_domain(&r0) {
        return Err(GraphError::ChartEscape { t: -window });
    }

    // ...and integrate r forward along the stored phase history.
    let mut thb = vec![0.0; m];
    let mut phib2 = vec![0.0; nf];
    let mut rhs_r = |r: &[f64], tau: f64, out: &mut [f64]| {
        let tc = tau.clamp(-window, 0.0);
        path.sample_into(tc, &mut thb)
            .expect("within phase history");
        for k in 0..nf {
            phib2[k] = phi0[k] + freqs[k] * tau;
        }
        if !sys.r_in_domain(r) {
            escaped.set(true);
            out.fill(f64::NAN);
            return;
        }
        sys.r_dot(&thb, r, &phib2, out);
    };
    let opts_r = StepperOpts {
        tol: ode_tol,
        store_dense: false,
        ..Default::default()
    };
    let run =
        integrate_rhs(&mut rhs_r, &r0, -window, 0.0, &opts_r).map_err(|e| escalate(e, &escaped))?;

    // Step 3: the transformed value is r at the node's own time.
    Ok(run.last_state().to_vec())
}

/// Apply one graph transform step on the whole grid. Node computations are
/// independent and run in parallel.
pub fn graph_transform_step(
    rho: &TorusGraph,
    sys: &PhaseNormalSystem,
    window: f64,
    ode_tol: f64,
) -> Result<TorusGraph, GraphError> {
    check_shapes(rho, sys)?;
    if window <= 0.0 {
        return Err(GraphError::InvalidInput("window must be positive".into()));
    }
    let n = rho.node_count();
    let mdim = rho.torus_dim();
    let results: Vec<Result<Vec<f64>, GraphError>> = (0..n)
        .into_par_iter()
        .map(|node| {
            let mut angles = vec![0.0; mdim];
            rho.angles_of(node, &mut angles);
            transform_at(sys, rho, &angles, window, ode_tol)
        })
        .collect();
    let mut out = rho.clone();
    for (node, res) in results.into_iter().enumerate() {
        match res {
            Ok(v) => out.set_node_value(node, &v),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Estimate the normal contraction rate of the initial guess and size the
/// window so the bounded-solution error `exp(-lambda window)` is ~1e-9.
pub(crate) fn auto_window(sys: &PhaseNormalSystem, rho: &TorusGraph) -> f64 {
    let p = sys.normal_dim();
    let m = sys.phase_dim();
    let nf = sys.forcing_frequencies().len();
    let n = rho.node_count();
    let stride = (n / 128).max(1);
    let mut ang = vec![0.0; m + nf];
    let mut rr = vec![0.0; p * p];
    let mut acc = 0.0;
    let mut count = 0;
    for node in (0..n).step_by(stride) {
        rho.angles_of(node, &mut ang);
        let (theta, phi) = ang.split_at(m);
        let r = rho.node_value(node);
        sys.d_r_d_r(theta, r, phi, &mut rr);
        let mut tr = 0.0;
        for i in 0..p {
            tr += rr[i * p + i];
        }
        acc += -tr / p as f64;
        count += 1;
    }
    let lambda = (acc / count.max(1) as f64).max(0.05);
    (20.0 / lambda).clamp(5.0, 400.0)
}

/// Iterate the graph transform to its fixed point.
///
/// Non-convergence (deltas not decreasing over five iterations, or the
/// iteration budget) returns [`GraphError::NoNhGraphFound`] carrying the last
/// iterate: past the persistence threshold this is the expected outcome.
pub fn solve_graph(
    rho0: &TorusGraph,
    sys: &PhaseNormalSystem,
    cfg: &GraphConfig,
) -> Result<GraphSolution, GraphError> {
    check_shapes(rho0, sys)?;
    let window = cfg.window.unwrap_or_else(|| auto_window(sys, rho0));
    let mut current = rho0.clone();
    let mut deltas = Vec::new();
    for iter in 1..=cfg.max_iter {
        let next = graph_transform_step(&current, sys, window, cfg.ode_tol)?;
        let delta = next.sup_distance(&current);
        deltas.push(delta);
        current = next;
        if delta < cfg.tol {
            let factor = contraction_fit(&deltas);
            return Ok(GraphSolution {
                graph: current,
                deltas,
                contraction_factor: factor,
                converged: true,
                window,
                iterations: iter,
            });
        }
        if stalled(&deltas) {
            break;
        }
    }
    let factor = contraction_fit(&deltas);
    let iterations = deltas.len();
    Err(GraphError::NoNhGraphFound(Box::new(GraphSolution {
        graph: current,
        deltas,
        contraction_factor: factor,
        converged: false,
        window,
        iterations,
    })))
}

/// Deltas non-decreasing over five consecutive iterations.
fn stalled(deltas: &[f64]) -> bool {
    if deltas.len() < 5 {
        return false;
    }
    let tail = &deltas[deltas.len() - 5..];
    tail.windows(2).all(|w| w[1] >= w[0])
}

fn contraction_fit(deltas: &[f64]) -> Option<f64> {
    if deltas.len() < 2 {
        return None;
    }
    let mut acc = 0.0;
    let mut count = 0;
    for w in deltas.windows(2) {
        if w[0] > 0.0 && w[1] > 0.0 {
            acc += (w[1] / w[0]).ln();
            count += 1;
        }
    }
    if count == 0 {
        None
    } else {
        Some((acc / count as f64).exp())
    }
}

#[derive(Debug, Clone)]
pub struct PullbackInfo {
    pub empty_fraction: f64,
    pub converged: bool,
    pub samples_per_fiber: usize,
}

/// Independent estimate of the invariant graph: integrate an ensemble seeded
/// near `r_seed` from `t - window` up to `t`, bin the endpoints by grid cell
/// and fit the per-cell value. Valid in the attracting case only.
pub fn pullback_graph(
    sys: &PhaseNormalSystem,
    dims: &[usize],
    window: f64,
    ensemble: usize,
    r_seed: &[f64],
    ode_tol: f64,
    seed: u64,
) -> Result<(TorusGraph, PullbackInfo), GraphError> {
    let m = sys.phase_dim();
    let p = sys.normal_dim();
    let freqs = sys.forcing_frequencies().to_vec();
    let nf = freqs.len();
    if dims.len() != m + nf {
        return Err(GraphError::InvalidInput("grid dims != torus dim".into()));
    }
    if r_seed.len() != p || p == 0 {
        return Err(GraphError::InvalidInput("bad seed dimension".into()));
    }
    if ensemble == 0 {
        return Err(GraphError::InvalidInput("ensemble must be positive".into()));
    }
    if window <= 0.0 {
        let graph = TorusGraph::constant(dims.to_vec(), r_seed);
        let info = PullbackInfo {
            empty_fraction: 0.0,
            converged: false,
            samples_per_fiber: 0,
        };
        return Ok((graph, info));
    }

    let theta_dims = &dims[..m];
    let phi_dims = &dims[m..];
    let n_theta: usize = theta_dims.iter().product();
    let n_phi: usize = phi_dims.iter().product();
    let seeds_per_fiber = n_theta * ensemble;

    // One independent, deterministic stream per fiber so results do not
    // depend on the thread schedule.
    let fibers: Vec<Result<Vec<Option<Vec<f64>>>, GraphError>> = (0..n_phi)
        .into_par_iter()
        .map(|fiber| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (fiber as u64).wrapping_mul(0x9E3779B97F4A7C15));
            let mut phi0 = vec![0.0; nf];
            super::torus::node_angles(phi_dims, fiber, &mut phi0);

            let mut endpoints: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(seeds_per_fiber);
            for s in 0..seeds_per_fiber {
                let mut theta0 = vec![0.0; m];
                if m == 1 {
                    let jitter: f64 = rng.gen();
                    theta0[0] = crate::TAU * (s as f64 + jitter) / seeds_per_fiber as f64;
                } else {
                    for th in theta0.iter_mut() {
                        *th = rng.gen::<f64>() * crate::TAU;
                    }
                }
                let mut z0 = theta0.clone();
                z0.extend_from_slice(r_seed);

                let escaped = Cell::new(false);
                let mut phib = vec![0.0; nf];
                let mut rhs = |z: &[f64], tau: f64, out: &mut [f64]| {
                    for k in 0..nf {
                        phib[k] = phi0[k] + freqs[k] * tau;
                    }
                    let (theta, r) = z.split_at(m);
                    if !sys.r_in_domain(r) {
                        escaped.set(true);
                        out.fill(f64::NAN);
                        return;
                    }
                    let (to, ro) = out.split_at_mut(m);
                    sys.theta_dot(theta, r, &phib, to);
                    sys.r_dot(theta, r, &phib, ro);
                };
                let opts = StepperOpts {
                    tol: ode_tol,
                    store_dense: false,
                    ..Default::default()
                };
                match integrate_rhs(&mut rhs, &z0, -window, 0.0, &opts) {
                    Ok(run) => {
                        let zf = run.last_state();
                        endpoints.push((zf[..m].to_vec(), zf[m..].to_vec()));
                    }
                    Err(_) => continue, // escaped or failed seed: just a lost sample
                }
            }

            // Fit each theta node of this fiber from the endpoint samples.
            let mut profile: Vec<Option<Vec<f64>>> = vec![None; n_theta];
            if m == 1 {
                let n0 = theta_dims[0];
                let h = crate::TAU / n0 as f64;
                // coverage check: bin by cell before fitting
                let mut counts = vec![0usize; n0];
                for (th, _) in &endpoints {
                    let cell = ((th[0].rem_euclid(crate::TAU) + 0.5 * h) / h) as usize % n0;
                    counts[cell] += 1;
                }
                let covered = counts.iter().filter(|&&c| c > 0).count();
                if covered * 5 >= n0 * 4 && endpoints.len() >= 2 * TRIG_FIT_ORDER + 1 {
                    // Endpoints are exact on-graph samples, so a low-order
                    // trigonometric least-squares fit recovers the fiber
                    // profile without the curvature bias of cell averages.
                    let fitted = trig_fit_profile(&endpoints, p, n0);
                    for (i, slot) in profile.iter_mut().enumerate() {
                        if counts[i] > 0 {
                            *slot = Some(fitted[i].clone());
                        }
                    }
                }
            } else {
                for (i, slot) in profile.iter_mut().enumerate() {
                    let mut center = vec![0.0; m];
                    super::torus::node_angles(theta_dims, i, &mut center);
                    let mut acc = vec![0.0; p];
                    let mut count = 0usize;
                    'ep: for (th, r) in &endpoints {
                        for d in 0..m {
                            let h = crate::TAU / theta_dims[d] as f64;
                            let mut u = (th[d] - center[d]).rem_euclid(crate::TAU);
                            if u > std::f64::consts::PI {
                                u -= crate::TAU;
                            }
                            if u.abs() > 0.5 * h {
                                continue 'ep;
                            }
                        }
                        for j in 0..p {
                            acc[j] += r[j];
                        }
                        count += 1;
                    }
                    if count > 0 {
                        *slot = Some(acc.iter().map(|v| v / count as f64).collect());
                    }
                }
            }
            Ok(profile)
        })
        .collect();

    let mut values: Vec<Option<Vec<f64>>> = vec![None; n_theta * n_phi];
    for (fiber, res) in fibers.into_iter().enumerate() {
        let profile = res?;
        let mut phi_idx = vec![0usize; nf];
        super::torus::node_multi_index(phi_dims, fiber, &mut phi_idx);
        for (ti, v) in profile.into_iter().enumerate() {
            let mut theta_idx = vec![0usize; m];
            super::torus::node_multi_index(theta_dims, ti, &mut theta_idx);
            let mut idx = theta_idx;
            idx.extend_from_slice(&phi_idx);
            let flat = super::torus::flat_index(dims, &idx);
            values[flat] = v;
        }
    }

    let empty = values.iter().filter(|v| v.is_none()).count();
    let empty_fraction = empty as f64 / values.len() as f64;
    if empty_fraction > 0.2 {
        return Err(GraphError::InsufficientSampling { empty_fraction });
    }
    fill_empty_cells(dims, p, &mut values);

    let mut graph = TorusGraph::constant(dims.to_vec(), r_seed);
    for (node, v) in values.iter().enumerate() {
        graph.set_node_value(node, v.as_ref().expect("filled"));
    }
    Ok((
        graph,
        PullbackInfo {
            empty_fraction,
            converged: true,
            samples_per_fiber: seeds_per_fiber,
        },
    ))
}

const TRIG_FIT_ORDER: usize = 6;

/// Least-squares trigonometric polynomial through the fiber's endpoint
/// samples, evaluated at the `n0` node angles.
fn trig_fit_profile(endpoints: &[(Vec<f64>, Vec<f64>)], p: usize, n0: usize) -> Vec<Vec<f64>> {
    let kmax = TRIG_FIT_ORDER.min(n0 / 2).min((endpoints.len() - 1) / 2);
    let cols = 1 + 2 * kmax;
    let mut design = Vec::with_capacity(endpoints.len() * cols);
    for (th, _) in endpoints {
        design.push(1.0);
        for k in 1..=kmax {
            let a = k as f64 * th[0];
            design.push(a.cos());
            design.push(a.sin());
        }
    }
    let mut betas = Vec::with_capacity(p);
    for j in 0..p {
        let y: Vec<f64> = endpoints.iter().map(|(_, r)| r[j]).collect();
        let beta = crate::linalg::least_squares(&design, &y, cols).unwrap_or_else(|| {
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let mut b = vec![0.0; cols];
            b[0] = mean;
            b
        });
        betas.push(beta);
    }
    (0..n0)
        .map(|i| {
            let theta = crate::TAU * i as f64 / n0 as f64;
            (0..p)
                .map(|j| {
                    let b = &betas[j];
                    let mut v = b[0];
                    for k in 1..=kmax {
                        let a = k as f64 * theta;
                        v += b[2 * k - 1] * a.cos() + b[2 * k] * a.sin();
                    }
                    v
                })
                .collect()
        })
        .collect()
}

fn fill_empty_cells(dims: &[usize], p: usize, values: &mut [Option<Vec<f64>>]) {
    let n = values.len();
    let mdim = dims.len();
    loop {
        let mut fills: Vec<(usize, Vec<f64>)> = Vec::new();
        for node in 0..n {
            if values[node].is_some() {
                continue;
            }
            let mut idx = vec![0usize; mdim];
            super::torus::node_multi_index(dims, node, &mut idx);
            let mut acc = vec![0.0; p];
            let mut count = 0;
            for d in 0..mdim {
                for step in [dims[d] - 1, 1] {
                    let mut nb = idx.clone();
                    nb[d] = (idx[d] + step) % dims[d];
                    let flat = super::torus::flat_index(dims, &nb);
                    if let Some(v) = &values[flat] {
                        for j in 0..p {
                            acc[j] += v[j];
                        }
                        count += 1;
                    }
                }
            }
            if count > 0 {
                fills.push((node, acc.iter().map(|v| v / count as f64).collect()));
            }
        }
        if fills.is_empty() {
            break;
        }
        for (node, v) in fills {
            values[node] = Some(v);
        }
        if values.iter().all(|v| v.is_some()) {
            break;
        }
    }
}

/// Solve the slope equation along on-graph trajectories by the same
/// backward-forward windowing as the transform. The returned graph holds the
/// `p x m` slope matrix row-major per node.
pub fn slope_field(
    rho: &TorusGraph,
    sys: &PhaseNormalSystem,
    window: f64,
    ode_tol: f64,
) -> Result<TorusGraph, GraphError> {
    check_shapes(rho, sys)?;
    let m = sys.phase_dim();
    let p = sys.normal_dim();
    let freqs = sys.forcing_frequencies().to_vec();
    let nf = freqs.len();
    let n = rho.node_count();
    let mdim = rho.torus_dim();

    let results: Vec<Result<Vec<f64>, GraphError>> = (0..n)
        .into_par_iter()
        .map(|node| {
            let mut angles = vec![0.0; mdim];
            rho.angles_of(node, &mut angles);
            let (theta0, phi0) = angles.split_at(m);
            let escaped = Cell::new(false);

            // Backward on-graph phase history (dense).
            let mut ang = vec![0.0; m + nf];
            let mut rbuf = vec![0.0; p];
            let mut phib = vec![0.0; nf];
            let mut rhs_theta = |th: &[f64], tau: f64, out: &mut [f64]| {
                for k in 0..nf {
                    phib[k] = phi0[k] + freqs[k] * tau;
                }
                ang[..m].copy_from_slice(th);
                ang[m..].copy_from_slice(&phib);
                rho.eval(&ang, &mut rbuf);
                if !sys.r_in_domain(&rbuf) {
                    escaped.set(true);
                    out.fill(f64::NAN);
                    return;
                }
                sys.theta_dot(th, &rbuf, &phib, out);
            };
            let opts = StepperOpts {
                tol: ode_tol,
                ..Default::default()
            };
            let path = integrate_rhs(&mut rhs_theta, theta0, 0.0, -window, &opts)
                .map_err(|e| escalate(e, &escaped))?;

            // Forward slope pass: sigma' = R_r sigma - sigma (Theta_theta +
            // Theta_r sigma) + R_theta, from sigma(-window) = 0.
            let mut thb = vec![0.0; m];
            let mut phib2 = vec![0.0; nf];
            let mut ang2 = vec![0.0; m + nf];
            let mut rb = vec![0.0; p];
            let mut tt = vec![0.0; m * m];
            let mut tr = vec![0.0; m * p];
            let mut rt = vec![0.0; p * m];
            let mut rr = vec![0.0; p * p];
            let mut a = vec![0.0; m * m];
            let blow = Cell::new(false);
            let mut rhs_sigma = |sig: &[f64], tau: f64, out: &mut [f64]| {
                if sig.iter().any(|v| v.abs() > 1e6) {
                    blow.set(true);
                    out.fill(f64::NAN);
                    return;
                }
                let tc = tau.clamp(-window, 0.0);
                path.sample_into(tc, &mut thb)
                    .expect("within phase history");
                for k in 0..nf {
                    phib2[k] = phi0[k] + freqs[k] * tau;
                }
                ang2[..m].copy_from_slice(&thb);
                ang2[m..].copy_from_slice(&phib2);
                rho.eval(&ang2, &mut rb);
                sys.d_theta_d_theta(&thb, &rb, &phib2, &mut tt);
                sys.d_theta_d_r(&thb, &rb, &phib2, &mut tr);
                sys.d_r_d_theta(&thb, &rb, &phib2, &mut rt);
                sys.d_r_d_r(&thb, &rb, &phib2, &mut rr);
                // a = Theta_theta + Theta_r sigma  (m x m)
                for i in 0..m {
                    for j in 0..m {
                        let mut s = tt[i * m + j];
                        for q in 0..p {
                            s += tr[i * p + q] * sig[q * m + j];
                        }
                        a[i * m + j] = s;
                    }
                }
                // out = R_r sigma - sigma a + R_theta  (p x m)
                for i in 0..p {
                    for j in 0..m {
                        let mut s = rt[i * m + j];
                        for q in 0..p {
                            s += rr[i * p + q] * sig[q * m + j];
                        }
                        for q in 0..m {
                            s -= sig[i * m + q] * a[q * m + j];
                        }
                        out[i * m + j] = s;
                    }
                }
            };
            let sigma0 = vec![0.0; p * m];
            let opts_s = StepperOpts {
                tol: ode_tol,
                store_dense: false,
                ..Default::default()
            };
            match integrate_rhs(&mut rhs_sigma, &sigma0, -window, 0.0, &opts_s) {
                Ok(run) => Ok(run.last_state().to_vec()),
                Err(_) if blow.get() => Err(GraphError::NhRatioViolation { sup: 1e6 }),
                Err(e) => Err(escalate(e, &escaped)),
            }
        })
        .collect();

    let mut out = TorusGraph::constant(rho.dims().to_vec(), &vec![0.0; p * m]);
    for (node, res) in results.into_iter().enumerate() {
        match res {
            Ok(v) => out.set_node_value(node, &v),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Estimate the grid interpolation error of a (near-)converged graph: the
/// pointwise transform at off-node probes is accurate independently of the
/// grid, so its gap to the interpolant measures the interpolation error.
pub fn interpolation_error_probe(
    rho: &TorusGraph,
    sys: &PhaseNormalSystem,
    window: f64,
    n_probes: usize,
    ode_tol: f64,
    seed: u64,
) -> Result<f64, GraphError> {
    check_shapes(rho, sys)?;
    let mdim = rho.torus_dim();
    let p = rho.components();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probes: Vec<Vec<f64>> = (0..n_probes)
        .map(|_| (0..mdim).map(|_| rng.gen::<f64>() * crate::TAU).collect())
        .collect();
    let worsts: Vec<Result<f64, GraphError>> = probes
        .par_iter()
        .map(|angles| {
            let exact = transform_at(sys, rho, angles, window, ode_tol)?;
            let mut interp = vec![0.0; p];
            rho.eval(angles, &mut interp);
            Ok(exact
                .iter()
                .zip(&interp)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max))
        })
        .collect();
    let mut worst: f64 = 0.0;
    for w in worsts {
        worst = worst.max(w?);
    }
    Ok(worst)
}
