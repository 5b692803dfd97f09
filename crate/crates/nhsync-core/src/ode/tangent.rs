//! Variational (tangent-space) propagation and Jacobian diagnostics.

use super::{check_tol, integrate_rhs, OdeError, StepperOpts, SystemSpec, Trajectory};
use crate::linalg::{matvec, mgs_orthonormalize, orthonormality_defect};

/// Result of a tangent-frame run: the base trajectory, the accumulated
/// log-growth sums per frame vector, and the elapsed time.
#[derive(Debug, Clone)]
pub struct TangentRun {
    pub trajectory: Trajectory,
    pub log_growth: Vec<f64>,
    pub elapsed: f64,
}

impl TangentRun {
    /// Log-growth rates (Lyapunov-exponent estimates): sums / elapsed.
    pub fn rates(&self) -> Vec<f64> {
        self.log_growth.iter().map(|s| s / self.elapsed).collect()
    }
}

/// Propagate the variational equation `dv = Dv(x,t) v` alongside the flow for
/// `k` orthonormal tangent vectors, QR-reorthonormalizing every
/// `renorm_interval` and accumulating the log R-diagonals (Benettin scheme).
pub fn integrate_with_tangents(
    sys: &SystemSpec,
    x0: &[f64],
    frame0: &[f64],
    t0: f64,
    t1: f64,
    renorm_interval: f64,
    tol: f64,
) -> Result<TangentRun, OdeError> {
    check_tol(tol)?;
    let dim = sys.dim();
    if x0.len() != dim {
        return Err(OdeError::InvalidInput("state length != system dim".into()));
    }
    if frame0.len() % dim != 0 || frame0.is_empty() {
        return Err(OdeError::InvalidInput(
            "frame must hold k vectors of state dimension".into(),
        ));
    }
    let k = frame0.len() / dim;
    if orthonormality_defect(frame0, dim, k) > 1e-8 {
        return Err(OdeError::InvalidInput("frame not orthonormal".into()));
    }
    if renorm_interval <= 0.0 {
        return Err(OdeError::InvalidInput("renorm_interval must be > 0".into()));
    }
    if t1 == t0 {
        return Err(OdeError::InvalidInput("empty time span".into()));
    }

    let sig = if t1 > t0 { 1.0 } else { -1.0 };
    let n_chunks = (((t1 - t0).abs() / renorm_interval).ceil() as usize).max(1);
    let dt = (t1 - t0) / n_chunks as f64;

    // Augmented state: base state followed by k tangent vectors.
    let mut aug = vec![0.0; dim * (1 + k)];
    aug[..dim].copy_from_slice(x0);
    aug[dim..].copy_from_slice(frame0);

    let jac_cell = std::cell::RefCell::new(vec![0.0; dim * dim]);
    let mut rhs = |z: &[f64], t: f64, out: &mut [f64]| {
        let x = &z[..dim];
        sys.eval(x, t, &mut out[..dim]);
        let mut j = jac_cell.borrow_mut();
        sys.jacobian(x, t, &mut j);
        for v in 0..k {
            let src = &z[dim * (1 + v)..dim * (2 + v)];
            let dst = &mut out[dim * (1 + v)..dim * (2 + v)];
            matvec(&j, src, dim, dim, dst);
        }
    };

    let opts = StepperOpts {
        tol,
        ..Default::default()
    };
    let mut log_growth = vec![0.0; k];
    let mut pieces: Vec<Trajectory> = Vec::with_capacity(n_chunks);
    let mut t = t0;
    for _ in 0..n_chunks {
        let t_next = t + dt;
        let aug_traj = integrate_rhs(&mut rhs, &aug, t, t_next, &opts)?;
        let end = if sig > 0.0 {
            aug_traj.last_state().to_vec()
        } else {
            aug_traj.state(0).to_vec()
        };
        pieces.push(aug_traj.project(dim));
        aug.copy_from_slice(&end);
        let rdiag = mgs_orthonormalize(&mut aug[dim..], dim, k);
        for (s, r) in log_growth.iter_mut().zip(&rdiag) {
            if *r <= 0.0 {
                return Err(OdeError::InvalidInput(
                    "tangent vector collapsed to zero".into(),
                ));
            }
            *s += r.ln();
        }
        let defect = orthonormality_defect(&aug[dim..], dim, k);
        if defect > 1e-6 {
            return Err(OdeError::OrthogonalityLoss { t: t_next, defect });
        }
        t = t_next;
    }

    let trajectory = if sig > 0.0 {
        Trajectory::concat(pieces)
    } else {
        pieces.reverse();
        Trajectory::concat(pieces)
    };
    Ok(TangentRun {
        trajectory,
        log_growth,
        elapsed: (t1 - t0).abs(),
    })
}

/// Max elementwise discrepancy between the system's (analytic or fallback)
/// Jacobian and a central finite difference with step `h * max(1, |x_i|)`.
pub fn jacobian_check(sys: &SystemSpec, x: &[f64], t: f64, h: f64) -> Result<f64, OdeError> {
    if !(h > 1e-9 && h < 1e-3) {
        return Err(OdeError::InvalidInput(format!(
            "h {h} outside (1e-9, 1e-3)"
        )));
    }
    let n = sys.dim();
    let mut ja = vec![0.0; n * n];
    sys.jacobian(x, t, &mut ja);
    let mut jf = vec![0.0; n * n];
    sys.jacobian_fd(x, t, Some(h), &mut jf);
    Ok(ja
        .iter()
        .zip(&jf)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_frame(dim: usize) -> Vec<f64> {
        let mut f = vec![0.0; dim * dim];
        for i in 0..dim {
            f[i * dim + i] = 1.0;
        }
        f
    }

    #[test]
    fn linear_diagonal_rates() {
        let sys = SystemSpec::new(2, |x, _t, out| {
            out[0] = -x[0];
            out[1] = -2.0 * x[1];
        })
        .with_jacobian(|_x, _t, out| {
            out.copy_from_slice(&[-1.0, 0.0, 0.0, -2.0]);
        });
        let run =
            integrate_with_tangents(&sys, &[1.0, 1.0], &identity_frame(2), 0.0, 100.0, 1.0, 1e-9)
                .unwrap();
        let rates = run.rates();
        assert!((rates[0] + 1.0).abs() < 1e-3, "rates={rates:?}");
        assert!((rates[1] + 2.0).abs() < 1e-3, "rates={rates:?}");
    }

    #[test]
    fn isometric_rotation_rates_vanish() {
        let sys = SystemSpec::new(2, |x, _t, out| {
            out[0] = -x[1];
            out[1] = x[0];
        })
        .with_jacobian(|_x, _t, out| {
            out.copy_from_slice(&[0.0, -1.0, 1.0, 0.0]);
        });
        let run =
            integrate_with_tangents(&sys, &[1.0, 0.0], &identity_frame(2), 0.0, 100.0, 0.5, 1e-9)
                .unwrap();
        for r in run.rates() {
            assert!(r.abs() < 1e-3, "rate {r}");
        }
    }

    #[test]
    fn rejects_non_orthonormal_frame() {
        let sys = SystemSpec::new(1, |x, _t, out| out[0] = -x[0]);
        let err = integrate_with_tangents(&sys, &[1.0], &[2.0], 0.0, 1.0, 0.5, 1e-8).unwrap_err();
        assert!(matches!(err, OdeError::InvalidInput(_)));
    }

    #[test]
    fn jacobian_check_exact_for_linear_system() {
        let sys = SystemSpec::new(2, |x, _t, out| {
            out[0] = 0.5 * x[0] - 1.25 * x[1];
            out[1] = 2.0 * x[0] + 0.75 * x[1];
        })
        .with_jacobian(|_x, _t, out| {
            out.copy_from_slice(&[0.5, -1.25, 2.0, 0.75]);
        });
        let d = jacobian_check(&sys, &[0.3, -0.9], 0.0, 1e-5).unwrap();
        assert!(d <= 1e-9, "d={d:.2e}");
    }

    #[test]
    fn jacobian_check_rejects_bad_step() {
        let sys = SystemSpec::new(1, |x, _t, out| out[0] = x[0]);
        assert!(jacobian_check(&sys, &[1.0], 0.0, 1e-2).is_err());
        assert!(jacobian_check(&sys, &[1.0], 0.0, 1e-10).is_err());
    }
}
