use crate::ode::SystemSpec;
use crate::TAU;
use std::fmt;
use std::sync::Arc;

/// Field callback over split coordinates: `(theta, r, phi, out)` where `phi`
/// are the forcing phases.
pub type SplitFieldFn = dyn Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync;

/// A non-autonomous system split into tangential phases `theta` on a torus and
/// normal coordinates `r`, with quasiperiodic time dependence carried by
/// forcing phases `phi = omega_f * t` (mod 2 pi):
///
/// ```text
/// theta' = Theta(theta, r, phi)
/// r'     = R(theta, r, phi)
/// phi'   = omega_f
/// ```
///
/// Partial derivatives can be supplied analytically; central finite
/// differences are the fallback.
#[derive(Clone)]
pub struct PhaseNormalSystem {
    phase_dim: usize,
    normal_dim: usize,
    forcing_frequencies: Vec<f64>,
    theta_dot: Arc<SplitFieldFn>,
    r_dot: Arc<SplitFieldFn>,
    dtheta_dtheta: Option<Arc<SplitFieldFn>>,
    dtheta_dr: Option<Arc<SplitFieldFn>>,
    dr_dtheta: Option<Arc<SplitFieldFn>>,
    dr_dr: Option<Arc<SplitFieldFn>>,
    r_domain: Option<(f64, f64)>,
}

impl fmt::Debug for PhaseNormalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseNormalSystem")
            .field("phase_dim", &self.phase_dim)
            .field("normal_dim", &self.normal_dim)
            .field("forcing_frequencies", &self.forcing_frequencies)
            .finish()
    }
}

impl PhaseNormalSystem {
    pub fn new<T, R>(
        phase_dim: usize,
        normal_dim: usize,
        forcing_frequencies: Vec<f64>,
        theta_dot: T,
        r_dot: R,
    ) -> Self
    where
        T: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        R: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        PhaseNormalSystem {
            phase_dim,
            normal_dim,
            forcing_frequencies,
            theta_dot: Arc::new(theta_dot),
            r_dot: Arc::new(r_dot),
            dtheta_dtheta: None,
            dtheta_dr: None,
            dr_dtheta: None,
            dr_dr: None,
            r_domain: None,
        }
    }

    /// A pure phase model (no normal direction), e.g. an Adler equation.
    pub fn phase_only<T>(phase_dim: usize, forcing_frequencies: Vec<f64>, theta_dot: T) -> Self
    where
        T: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::new(
            phase_dim,
            0,
            forcing_frequencies,
            theta_dot,
            |_t, _r, _p, _out| {},
        )
    }

    /// Analytic partials: `Theta_theta` (m x m), `Theta_r` (m x p),
    /// `R_theta` (p x m), `R_r` (p x p), all row-major.
    pub fn with_partials<A, B, C, D>(mut self, tt: A, tr: B, rt: C, rr: D) -> Self
    where
        A: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        B: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        C: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        D: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.dtheta_dtheta = Some(Arc::new(tt));
        self.dtheta_dr = Some(Arc::new(tr));
        self.dr_dtheta = Some(Arc::new(rt));
        self.dr_dr = Some(Arc::new(rr));
        self
    }

    /// Componentwise validity interval for the normal coordinates (chart
    /// domain); leaving it triggers chart-escape errors in the solvers.
    pub fn with_r_domain(mut self, lo: f64, hi: f64) -> Self {
        self.r_domain = Some((lo, hi));
        self
    }

    pub fn phase_dim(&self) -> usize {
        self.phase_dim
    }

    pub fn normal_dim(&self) -> usize {
        self.normal_dim
    }

    pub fn forcing_frequencies(&self) -> &[f64] {
        &self.forcing_frequencies
    }

    /// Dimension of the torus the invariant graph lives on: oscillator
    /// phases plus forcing phases.
    pub fn torus_dim(&self) -> usize {
        self.phase_dim + self.forcing_frequencies.len()
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.dtheta_dtheta.is_some()
    }

    pub fn r_in_domain(&self, r: &[f64]) -> bool {
        match self.r_domain {
            None => true,
            Some((lo, hi)) => r.iter().all(|&v| v > lo && v < hi),
        }
    }

    pub fn theta_dot(&self, theta: &[f64], r: &[f64], phi: &[f64], out: &mut [f64]) {
        (self.theta_dot)(theta, r, phi, out);
    }

    pub fn r_dot(&self, theta: &[f64], r: &[f64], phi: &[f64], out: &mut [f64]) {
        (self.r_dot)(theta, r, phi, out);
    }

    /// Forcing phases at time `t` given the phases at time 0.
    pub fn phi_at(&self, phi0: &[f64], t: f64) -> Vec<f64> {
        self.forcing_frequencies
            .iter()
            .zip(phi0)
            .map(|(&w, &p0)| p0 + w * t)
            .collect()
    }

    pub fn d_theta_d_theta(&self, theta: &[f64], r: &[f64], phi: &[f64], out: &mut [f64]) {
        match &self.dtheta_dtheta {
            Some(f) => f(theta, r, phi, out),
            None => fd_block(
                |th, rr, o| self.theta_dot(th, rr, phi, o),
                theta,
                r,
                true,
                self.phase_dim,
                out,
            ),
        }
    }

    pub fn d_theta_d_r(&self, theta: &[f64], r: &[f64], phi: &[f64], out: &mut [f64]) {
        match &self.dtheta_dr {
            Some(f) => f(theta, r, phi, out),
            None => fd_block(
                |th, rr, o| self.theta_dot(th, rr, phi, o),
                theta,
                r,
                false,
                self.phase_dim,
                out,
            ),
        }
    }

    pub fn d_r_d_theta(&self, theta: &[f64], r: &[f64], phi: &[f64], out: &mut [f64]) {
        match &self.dr_dtheta {
            Some(f) => f(theta, r, phi, out),
            None => fd_block(
                |th, rr, o| self.r_dot(th, rr, phi, o),
                theta,
                r,
                true,
                self.normal_dim,
                out,
            ),
        }
    }

    pub fn d_r_d_r(&self, theta: &[f64], r: &[f64], phi: &[f64], out: &mut [f64]) {
        match &self.dr_dr {
            Some(f) => f(theta, r, phi, out),
            None => fd_block(
                |th, rr, o| self.r_dot(th, rr, phi, o),
                theta,
                r,
                false,
                self.normal_dim,
                out,
            ),
        }
    }

    /// Flatten into a plain [`SystemSpec`] on state `[theta, r]` with the
    /// forcing phases advancing as `phi0 + omega_f t`. Normal coordinates
    /// outside the chart domain yield NaN velocities (NaN-failure upstream).
    pub fn to_system_spec(&self, phi0: Vec<f64>) -> SystemSpec {
        let m = self.phase_dim;
        let p = self.normal_dim;
        let me = self.clone();
        let me_jac = self.clone();
        let phi0_jac = phi0.clone();
        let freqs = self.forcing_frequencies.clone();
        SystemSpec::new(m + p, move |x, t, out| {
            let phi = me.phi_at(&phi0, t);
            let (theta, r) = x.split_at(m);
            if !me.r_in_domain(r) {
                out.fill(f64::NAN);
                return;
            }
            let (to, ro) = out.split_at_mut(m);
            me.theta_dot(theta, r, &phi, to);
            me.r_dot(theta, r, &phi, ro);
        })
        .with_jacobian(move |x, t, out| {
            let phi = me_jac.phi_at(&phi0_jac, t);
            let (theta, r) = x.split_at(m);
            let n = m + p;
            let mut tt = vec![0.0; m * m];
            let mut tr = vec![0.0; m * p];
            let mut rt = vec![0.0; p * m];
            let mut rr = vec![0.0; p * p];
            me_jac.d_theta_d_theta(theta, r, &phi, &mut tt);
            me_jac.d_theta_d_r(theta, r, &phi, &mut tr);
            me_jac.d_r_d_theta(theta, r, &phi, &mut rt);
            me_jac.d_r_d_r(theta, r, &phi, &mut rr);
            for i in 0..m {
                for j in 0..m {
                    out[i * n + j] = tt[i * m + j];
                }
                for j in 0..p {
                    out[i * n + m + j] = tr[i * p + j];
                }
            }
            for i in 0..p {
                for j in 0..m {
                    out[(m + i) * n + j] = rt[i * m + j];
                }
                for j in 0..p {
                    out[(m + i) * n + m + j] = rr[i * p + j];
                }
            }
        })
        .with_forcing_frequencies(freqs)
    }
}

/// Central differences of `f` with respect to theta (`wrt_theta`) or r,
/// producing a `rows x cols` row-major block.
fn fd_block(
    f: impl Fn(&[f64], &[f64], &mut [f64]),
    theta: &[f64],
    r: &[f64],
    wrt_theta: bool,
    rows: usize,
    out: &mut [f64],
) {
    let base = if wrt_theta { theta } else { r };
    let cols = base.len();
    let mut pert = base.to_vec();
    let mut fp = vec![0.0; rows];
    let mut fm = vec![0.0; rows];
    for j in 0..cols {
        let h = (1e-6 * base[j].abs()).max(1e-6);
        pert[j] = base[j] + h;
        if wrt_theta {
            f(&pert, r, &mut fp);
        } else {
            f(theta, &pert, &mut fp);
        }
        pert[j] = base[j] - h;
        if wrt_theta {
            f(&pert, r, &mut fm);
        } else {
            f(theta, &pert, &mut fm);
        }
        pert[j] = base[j];
        for i in 0..rows {
            out[i * cols + j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
}

/// Wrap an angle to `[0, 2 pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(TAU)
}
