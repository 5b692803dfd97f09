//! Non-autonomous ODE integration in extended state space.
//!
//! [`SystemSpec`] holds a vector field `v(x, t)` with an optional analytic
//! Jacobian (finite differences otherwise). [`integrate`] runs an adaptive
//! Dormand-Prince 5(4) pair with dense output; [`integrate_with_tangents`]
//! propagates an orthonormal tangent frame alongside for Lyapunov and
//! contraction-rate estimates.

mod dopri5;
mod tangent;
mod trajectory;

pub(crate) use dopri5::{integrate_rhs, StepperOpts};
pub use tangent::{integrate_with_tangents, jacobian_check, TangentRun};
pub use trajectory::Trajectory;

use std::fmt;
use std::sync::Arc;

/// Shared function type for vector fields: `(x, t, out)`.
pub type FieldFn = dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync;

#[derive(Debug, Clone)]
pub enum OdeError {
    /// Step size underflowed (stiff blow-up); carries the last good time.
    IntegrationFailure { t: f64 },
    /// The field returned a non-finite value.
    NanFailure { t: f64 },
    /// Step budget exhausted.
    MaxSteps { t: f64 },
    /// Tangent frame lost orthogonality beyond tolerance after re-QR.
    OrthogonalityLoss { t: f64, defect: f64 },
    /// Interpolation query outside the stored span.
    OutOfRange { t: f64, lo: f64, hi: f64 },
    /// Precondition violation.
    InvalidInput(String),
}

impl fmt::Display for OdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdeError::IntegrationFailure { t } => {
                write!(f, "integration failed (step underflow) at t={t}")
            }
            OdeError::NanFailure { t } => write!(f, "non-finite field output near t={t}"),
            OdeError::MaxSteps { t } => write!(f, "step budget exhausted at t={t}"),
            OdeError::OrthogonalityLoss { t, defect } => {
                write!(f, "tangent frame defect {defect:.2e} at t={t}")
            }
            OdeError::OutOfRange { t, lo, hi } => {
                write!(f, "query t={t} outside stored span [{lo}, {hi}]")
            }
            OdeError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl std::error::Error for OdeError {}

/// A non-autonomous vector field with optional analytic Jacobian and the
/// angular frequencies of any quasiperiodic time dependence.
#[derive(Clone)]
pub struct SystemSpec {
    dim: usize,
    eval: Arc<FieldFn>,
    jacobian: Option<Arc<FieldFn>>,
    forcing_frequencies: Vec<f64>,
    smooth_at: Option<Arc<dyn Fn(&[f64]) -> bool + Send + Sync>>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("forcing_frequencies", &self.forcing_frequencies)
            .finish()
    }
}

impl SystemSpec {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
    {
        SystemSpec {
            dim,
            eval: Arc::new(eval),
            jacobian: None,
            forcing_frequencies: Vec::new(),
            smooth_at: None,
        }
    }

    /// Attach an analytic Jacobian writing `dim x dim` row-major into `out`.
    pub fn with_jacobian<F>(mut self, jac: F) -> Self
    where
        F: Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_forcing_frequencies(mut self, freqs: Vec<f64>) -> Self {
        self.forcing_frequencies = freqs;
        self
    }

    /// Mark where the field fails to be smooth (e.g. the origin of the
    /// sharp-q Poincare oscillator).
    pub fn with_smooth_predicate<F>(mut self, pred: F) -> Self
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        self.smooth_at = Some(Arc::new(pred));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn forcing_frequencies(&self) -> &[f64] {
        &self.forcing_frequencies
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn is_smooth_at(&self, x: &[f64]) -> bool {
        self.smooth_at.as_ref().map_or(true, |p| p(x))
    }

    pub fn eval(&self, x: &[f64], t: f64, out: &mut [f64]) {
        (self.eval)(x, t, out);
    }

    pub fn velocity(&self, x: &[f64], t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval(x, t, &mut out);
        out
    }

    /// Analytic Jacobian when present, otherwise central finite differences
    /// with per-component step `max(1e-6, 1e-6 |x_i|)`.
    pub fn jacobian(&self, x: &[f64], t: f64, out: &mut [f64]) {
        match &self.jacobian {
            Some(j) => j(x, t, out),
            None => self.jacobian_fd(x, t, None, out),
        }
    }

    /// Central-difference Jacobian. `h` scales with `max(1, |x_i|)` when
    /// given; defaults to `max(1e-6, 1e-6 |x_i|)`.
    pub fn jacobian_fd(&self, x: &[f64], t: f64, h: Option<f64>, out: &mut [f64]) {
        let n = self.dim;
        let mut xp = x.to_vec();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        for j in 0..n {
            let hj = match h {
                Some(h) => h * x[j].abs().max(1.0),
                None => (1e-6 * x[j].abs()).max(1e-6),
            };
            xp[j] = x[j] + hj;
            self.eval(&xp, t, &mut fp);
            xp[j] = x[j] - hj;
            self.eval(&xp, t, &mut fm);
            xp[j] = x[j];
            for i in 0..n {
                out[i * n + j] = (fp[i] - fm[i]) / (2.0 * hj);
            }
        }
    }
}

/// Integrate `sys` from `x0` over `[t0, t1]` (either direction) with local
/// error per step at most `tol * (1 + |x|)`. The returned trajectory always
/// has increasing times.
pub fn integrate(
    sys: &SystemSpec,
    x0: &[f64],
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<Trajectory, OdeError> {
    check_tol(tol)?;
    if x0.len() != sys.dim() {
        return Err(OdeError::InvalidInput(format!(
            "state length {} != system dim {}",
            x0.len(),
            sys.dim()
        )));
    }
    if t1 == t0 {
        return Err(OdeError::InvalidInput("empty time span".into()));
    }
    let opts = StepperOpts {
        tol,
        ..Default::default()
    };
    let mut rhs = |x: &[f64], t: f64, out: &mut [f64]| sys.eval(x, t, out);
    integrate_rhs(&mut rhs, x0, t0, t1, &opts)
}

pub(crate) fn check_tol(tol: f64) -> Result<(), OdeError> {
    if !(tol > 1e-14 && tol < 1e-2) {
        return Err(OdeError::InvalidInput(format!(
            "tol {tol} outside (1e-14, 1e-2)"
        )));
    }
    Ok(())
}
