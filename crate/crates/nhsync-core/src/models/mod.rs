//! Ready-made systems with analytic Jacobians and phase/normal charts.

use crate::graph::PhaseNormalSystem;
use crate::ode::SystemSpec;
use crate::TAU;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub enum ModelError {
    InvalidParams(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
        }
    }
}

impl std::error::Error for ModelError {}

/// Forcing waveform of the Poincare oscillator, expressed both as a function
/// of time and as a function of the corresponding torus phases.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    /// `f(t) = sin 2 pi t + sin 4 t` (two incommensurate tones).
    TwoTone,
    /// `f(t) = sin(omega t)`.
    SingleTone {
        omega: f64,
    },
    Zero,
}

impl Forcing {
    pub fn frequencies(&self) -> Vec<f64> {
        match self {
            Forcing::TwoTone => vec![TAU, 4.0],
            Forcing::SingleTone { omega } => vec![*omega],
            Forcing::Zero => vec![],
        }
    }

    /// Waveform as a function of the forcing phases `phi = omega_f t`.
    pub fn eval_phases(&self, phi: &[f64]) -> f64 {
        match self {
            Forcing::TwoTone => phi[0].sin() + phi[1].sin(),
            Forcing::SingleTone { .. } => phi[0].sin(),
            Forcing::Zero => 0.0,
        }
    }

    pub fn eval_time(&self, t: f64) -> f64 {
        match self {
            Forcing::TwoTone => (TAU * t).sin() + (4.0 * t).sin(),
            Forcing::SingleTone { omega } => (omega * t).sin(),
            Forcing::Zero => 0.0,
        }
    }
}

/// Radial stiffness form `q` of the Poincare oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QVariant {
    /// `q = alpha (r - a)`: the printed form, non-smooth at the origin.
    Sharp,
    /// `q = alpha (r^2 - a^2)`: smooth everywhere.
    Smooth,
}

/// Quasiperiodically forced limit-cycle oscillator.
#[derive(Debug, Clone)]
pub struct PoincareParams {
    /// Radial contraction strength (> 0).
    pub alpha: f64,
    /// Limit-cycle radius (> 0).
    pub a: f64,
    /// Angular frequency of the cycle.
    pub omega: f64,
    /// Forcing amplitude (>= 0).
    pub gamma: f64,
    pub forcing: Forcing,
    pub q_variant: QVariant,
}

impl Default for PoincareParams {
    fn default() -> Self {
        PoincareParams {
            alpha: 1.0,
            a: 1.0,
            omega: 1.0,
            gamma: 0.0,
            forcing: Forcing::TwoTone,
            q_variant: QVariant::Sharp,
        }
    }
}

impl PoincareParams {
    fn validate(&self) -> Result<(), ModelError> {
        if !(self.alpha > 0.0 && self.a > 0.0 && self.gamma >= 0.0) {
            return Err(ModelError::InvalidParams(
                "need alpha > 0, a > 0, gamma >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Cartesian form: `x' = -q x - omega y`, `y' = omega x - q y + gamma f(t)`.
/// With the sharp `q` the field is well-defined but non-smooth at the origin,
/// which the smoothness predicate reports.
pub fn poincare_cartesian(p: &PoincareParams) -> Result<SystemSpec, ModelError> {
    p.validate()?;
    let pp = p.clone();
    let pj = p.clone();
    let sharp = p.q_variant == QVariant::Sharp;
    let freqs = p.forcing.frequencies();
    let sys = SystemSpec::new(2, move |x, t, out| {
        let (px, py) = (x[0], x[1]);
        let q = match pp.q_variant {
            QVariant::Sharp => pp.alpha * ((px * px + py * py).sqrt() - pp.a),
            QVariant::Smooth => pp.alpha * (px * px + py * py - pp.a * pp.a),
        };
        let f = pp.forcing.eval_time(t);
        out[0] = -q * px - pp.omega * py;
        out[1] = pp.omega * px - q * py + pp.gamma * f;
    })
    .with_jacobian(move |x, _t, out| {
        let (px, py) = (x[0], x[1]);
        let (q, qx, qy) = match pj.q_variant {
            QVariant::Sharp => {
                let r = (px * px + py * py).sqrt().max(1e-300);
                (pj.alpha * (r - pj.a), pj.alpha * px / r, pj.alpha * py / r)
            }
            QVariant::Smooth => (
                pj.alpha * (px * px + py * py - pj.a * pj.a),
                2.0 * pj.alpha * px,
                2.0 * pj.alpha * py,
            ),
        };
        out[0] = -q - qx * px;
        out[1] = -pj.omega - qy * px;
        out[2] = pj.omega - qx * py;
        out[3] = -q - qy * py;
    })
    .with_forcing_frequencies(freqs);
    Ok(if sharp {
        sys.with_smooth_predicate(|x| x[0] != 0.0 || x[1] != 0.0)
    } else {
        sys
    })
}

/// Polar chart of the same field (theta = phase, r = normal):
///
/// ```text
/// r'     = -alpha r (r - a) + gamma f sin(theta)
/// theta' = omega + (gamma / r) f cos(theta)
/// ```
///
/// with analytic partials for the graph transform. Valid for `r > 0`.
pub fn poincare_polar(p: &PoincareParams) -> Result<PhaseNormalSystem, ModelError> {
    p.validate()?;
    let freqs = p.forcing.frequencies();
    let t1 = p.clone();
    let t2 = p.clone();
    let t3 = p.clone();
    let t4 = p.clone();
    let t5 = p.clone();
    let t6 = p.clone();
    Ok(PhaseNormalSystem::new(
        1,
        1,
        freqs,
        move |th, r, phi, out| {
            out[0] = t1.omega + t1.gamma / r[0] * t1.forcing.eval_phases(phi) * th[0].cos();
        },
        move |th, r, phi, out| {
            let qr = match t2.q_variant {
                QVariant::Sharp => t2.alpha * r[0] * (r[0] - t2.a),
                QVariant::Smooth => t2.alpha * r[0] * (r[0] * r[0] - t2.a * t2.a),
            };
            out[0] = -qr + t2.gamma * t2.forcing.eval_phases(phi) * th[0].sin();
        },
    )
    .with_partials(
        move |th, r, phi, out| {
            // Theta_theta
            out[0] = -t3.gamma / r[0] * t3.forcing.eval_phases(phi) * th[0].sin();
        },
        move |th, r, phi, out| {
            // Theta_r
            out[0] = -t4.gamma / (r[0] * r[0]) * t4.forcing.eval_phases(phi) * th[0].cos();
        },
        move |th, _r, phi, out| {
            // R_theta
            out[0] = t5.gamma * t5.forcing.eval_phases(phi) * th[0].cos();
        },
        move |_th, r, _phi, out| {
            // R_r
            out[0] = match t6.q_variant {
                QVariant::Sharp => -t6.alpha * (2.0 * r[0] - t6.a),
                QVariant::Smooth => -t6.alpha * (3.0 * r[0] * r[0] - t6.a * t6.a),
            };
        },
    )
    .with_r_domain(1e-9, 1e12))
}

/// Class I (excitable, SNIC) neuron: `theta' = mu + 1 - cos(theta)` with `mu`
/// integrated as a state so coupling can drive it.
#[derive(Clone)]
pub struct ClassINeuronParams {
    pub mu: f64,
    /// Optional input added to `mu'`.
    pub drive: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for ClassINeuronParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassINeuronParams")
            .field("mu", &self.mu)
            .field("driven", &self.drive.is_some())
            .finish()
    }
}

impl Default for ClassINeuronParams {
    fn default() -> Self {
        ClassINeuronParams {
            mu: 0.5,
            drive: None,
        }
    }
}

/// State is `(theta, mu)`.
pub fn class1_neuron(p: &ClassINeuronParams) -> SystemSpec {
    let drive = p.drive.clone();
    SystemSpec::new(2, move |x, t, out| {
        out[0] = x[1] + 1.0 - x[0].cos();
        out[1] = drive.as_ref().map_or(0.0, |d| d(t));
    })
    .with_jacobian(|x, _t, out| {
        out[0] = x[0].sin();
        out[1] = 1.0;
        out[2] = 0.0;
        out[3] = 0.0;
    })
}

/// Spiking period at constant `mu > 0`: `2 pi / sqrt(mu^2 + 2 mu)`.
pub fn class1_period(mu: f64) -> f64 {
    TAU / (mu * mu + 2.0 * mu).sqrt()
}

/// Rest states at constant `mu` in `[-2, 0]`: `(stable, unstable)` angles
/// solving `cos(theta) = 1 + mu`.
pub fn class1_rest_states(mu: f64) -> Option<(f64, f64)> {
    if !(-2.0..=0.0).contains(&mu) {
        return None;
    }
    let t = (1.0 + mu).acos();
    Some((-t, t))
}

/// Three-node circuit with odd cubic nonlinearity `g(z) = g1 z + g3 z^3`:
/// `x' = a x - b y`, `y' = c x - e z`, `z' = -f y - g(z)`.
#[derive(Debug, Clone, Copy)]
pub struct CircuitParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub f: f64,
    pub g1: f64,
    pub g3: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        // Qualitative defaults; `a` is the sweep knob.
        CircuitParams {
            a: 0.2,
            b: 1.0,
            c: 1.0,
            e: 1.0,
            f: 1.0,
            g1: 1.0,
            g3: 1.0,
        }
    }
}

pub fn circuit(p: &CircuitParams) -> Result<SystemSpec, ModelError> {
    if !(p.b > 0.0 && p.c > 0.0 && p.e > 0.0 && p.f > 0.0) {
        return Err(ModelError::InvalidParams("need b, c, e, f > 0".into()));
    }
    let q = *p;
    Ok(SystemSpec::new(3, move |x, _t, out| {
        out[0] = q.a * x[0] - q.b * x[1];
        out[1] = q.c * x[0] - q.e * x[2];
        out[2] = -q.f * x[1] - (q.g1 * x[2] + q.g3 * x[2] * x[2] * x[2]);
    })
    .with_jacobian(move |x, _t, out| {
        out.copy_from_slice(&[
            q.a,
            -q.b,
            0.0,
            q.c,
            0.0,
            -q.e,
            0.0,
            -q.f,
            -(q.g1 + 3.0 * q.g3 * x[2] * x[2]),
        ]);
    }))
}

/// Rossler system in the standard form `x' = -y - z`, `y' = x + a y`,
/// `z' = b + z (x - c)`.
#[derive(Debug, Clone, Copy)]
pub struct RosslerParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for RosslerParams {
    fn default() -> Self {
        RosslerParams {
            a: 0.2,
            b: 0.2,
            c: 5.7,
        }
    }
}

pub fn rossler(p: &RosslerParams) -> SystemSpec {
    let q = *p;
    SystemSpec::new(3, move |x, _t, out| {
        out[0] = -x[1] - x[2];
        out[1] = x[0] + q.a * x[1];
        out[2] = q.b + x[2] * (x[0] - q.c);
    })
    .with_jacobian(move |x, _t, out| {
        out.copy_from_slice(&[0.0, -1.0, -1.0, 1.0, q.a, 0.0, x[2], 0.0, x[0] - q.c]);
    })
}

/// Rossler with sinusoidal forcing `amp sin(omega_f t)` added to `y'`.
pub fn forced_rossler(p: &RosslerParams, amp: f64, omega_f: f64) -> SystemSpec {
    let q = *p;
    SystemSpec::new(3, move |x, t, out| {
        out[0] = -x[1] - x[2];
        out[1] = x[0] + q.a * x[1] + amp * (omega_f * t).sin();
        out[2] = q.b + x[2] * (x[0] - q.c);
    })
    .with_jacobian(move |x, _t, out| {
        out.copy_from_slice(&[0.0, -1.0, -1.0, 1.0, q.a, 0.0, x[2], 0.0, x[0] - q.c]);
    })
    .with_forcing_frequencies(vec![omega_f])
}

/// Adler phase equation `theta' = delta - k sin(theta)`; the classical model
/// of a phase difference under sinusoidal coupling.
pub fn adler(delta: f64, k: f64) -> SystemSpec {
    SystemSpec::new(1, move |x, _t, out| {
        out[0] = delta - k * x[0].sin();
    })
    .with_jacobian(move |x, _t, out| {
        out[0] = -k * x[0].cos();
    })
}

/// The same Adler equation as a pure phase model for fiber-collapse work.
pub fn adler_phase(delta: f64, k: f64) -> PhaseNormalSystem {
    PhaseNormalSystem::phase_only(1, vec![], move |th, _r, _phi, out| {
        out[0] = delta - k * th[0].sin();
    })
}

/// Two systems coupled through state-dependent terms:
/// `x_i' = v_i(x_i) + strength * g_i(x_1, x_2)`.
#[derive(Clone)]
pub struct CoupledPair {
    pub sys1: SystemSpec,
    pub sys2: SystemSpec,
    /// Writes `g1` and `g2` given the two sub-states.
    pub coupling: Arc<dyn Fn(&[f64], &[f64], &mut [f64], &mut [f64]) + Send + Sync>,
    pub strength: f64,
}

impl CoupledPair {
    /// Diffusive coupling `g_i = x_j - x_i` (equal dimensions required).
    pub fn diffusive(sys1: SystemSpec, sys2: SystemSpec, strength: f64) -> Self {
        assert_eq!(sys1.dim(), sys2.dim());
        CoupledPair {
            sys1,
            sys2,
            coupling: Arc::new(|x1, x2, g1, g2| {
                for i in 0..x1.len() {
                    g1[i] = x2[i] - x1[i];
                    g2[i] = x1[i] - x2[i];
                }
            }),
            strength,
        }
    }
}

/// Product system of a coupled pair. At strength 0 it decouples exactly.
pub fn coupled_pair(cp: &CoupledPair) -> SystemSpec {
    let d1 = cp.sys1.dim();
    let d2 = cp.sys2.dim();
    let sys1 = cp.sys1.clone();
    let sys2 = cp.sys2.clone();
    let coupling = cp.coupling.clone();
    let k = cp.strength;
    let mut freqs = cp.sys1.forcing_frequencies().to_vec();
    freqs.extend_from_slice(cp.sys2.forcing_frequencies());
    SystemSpec::new(d1 + d2, move |x, t, out| {
        let (x1, x2) = x.split_at(d1);
        let (o1, o2) = out.split_at_mut(d1);
        sys1.eval(x1, t, o1);
        sys2.eval(x2, t, o2);
        if k != 0.0 {
            let mut g1 = vec![0.0; d1];
            let mut g2 = vec![0.0; d2];
            coupling(x1, x2, &mut g1, &mut g2);
            for i in 0..d1 {
                o1[i] += k * g1[i];
            }
            for i in 0..d2 {
                o2[i] += k * g2[i];
            }
        }
    })
    .with_forcing_frequencies(freqs)
}
