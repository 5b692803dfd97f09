//! Dormand-Prince 5(4) embedded pair with quartic dense output.

use super::trajectory::{DenseSeg, Trajectory};
use super::OdeError;

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;
// Error weights (5th minus 4th order, applied to k1,k3..k6 and the FSAL stage).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone)]
pub(crate) struct StepperOpts {
    pub tol: f64,
    pub max_steps: usize,
    pub store_dense: bool,
    pub h0: Option<f64>,
}

impl Default for StepperOpts {
    fn default() -> Self {
        StepperOpts {
            tol: 1e-8,
            max_steps: 20_000_000,
            store_dense: true,
            h0: None,
        }
    }
}

fn rms_scaled(v: &[f64], y0: &[f64], y1: &[f64], tol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..v.len() {
        let sc = tol * (1.0 + y0[i].abs().max(y1[i].abs()));
        let q = v[i] / sc;
        acc += q * q;
    }
    (acc / v.len() as f64).sqrt()
}

fn initial_step(
    rhs: &mut dyn FnMut(&[f64], f64, &mut [f64]),
    x0: &[f64],
    f0: &[f64],
    t0: f64,
    span: f64,
    sig: f64,
    tol: f64,
) -> f64 {
    let dim = x0.len();
    let sc: Vec<f64> = x0.iter().map(|&y| tol * (1.0 + y.abs())).collect();
    let d0 = (x0
        .iter()
        .zip(&sc)
        .map(|(&y, &s)| (y / s) * (y / s))
        .sum::<f64>()
        / dim as f64)
        .sqrt();
    let d1 = (f0
        .iter()
        .zip(&sc)
        .map(|(&f, &s)| (f / s) * (f / s))
        .sum::<f64>()
        / dim as f64)
        .sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(span);
    let probe: Vec<f64> = x0.iter().zip(f0).map(|(&y, &f)| y + sig * h0 * f).collect();
    let mut f1 = vec![0.0; dim];
    rhs(&probe, t0 + sig * h0, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((&a, &b), &s)| ((a - b) / s) * ((a - b) / s))
        .sum::<f64>()
        / dim as f64)
        .sqrt()
        / h0;
    let d12 = d1.max(d2);
    let h1 = if d12 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d12).powf(0.2)
    };
    h1.min(100.0 * h0).min(span)
}

/// Integrate `rhs` from `(x0, t0)` to `t1` (either direction). Returns the
/// trajectory with times in increasing order.
pub(crate) fn integrate_rhs(
    rhs: &mut dyn FnMut(&[f64], f64, &mut [f64]),
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &StepperOpts,
) -> Result<Trajectory, OdeError> {
    let dim = x0.len();
    let sig = if t1 > t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();

    let mut t = t0;
    let mut y = x0.to_vec();
    let mut k1 = vec![0.0; dim];
    rhs(&y, t, &mut k1);
    if !k1.iter().all(|v| v.is_finite()) {
        return Err(OdeError::NanFailure { t });
    }

    let mut h = match opts.h0 {
        Some(h0) => h0.abs().min(span),
        None => initial_step(rhs, &y, &k1, t0, span, sig, opts.tol),
    };

    let mut times = vec![t0];
    let mut states = x0.to_vec();
    let mut dense: Vec<DenseSeg> = Vec::new();

    let mut k = vec![vec![0.0; dim]; 7];
    k[0].copy_from_slice(&k1);
    let mut stage = vec![0.0; dim];
    let mut y1 = vec![0.0; dim];
    let mut errv = vec![0.0; dim];

    let mut rejected = false;
    let mut nonfinite_reject = false;
    let mut steps = 0usize;

    while (t1 - t) * sig > 0.0 {
        if steps >= opts.max_steps {
            return Err(OdeError::MaxSteps { t });
        }
        steps += 1;

        if h < 1e-13 * (1.0 + t.abs()) {
            return if nonfinite_reject {
                Err(OdeError::NanFailure { t })
            } else {
                Err(OdeError::IntegrationFailure { t })
            };
        }
        if h > (t1 - t) * sig {
            h = (t1 - t) * sig;
        }
        let hs = sig * h;

        // Stages 2-6.
        for i in 0..dim {
            stage[i] = y[i] + hs * A21 * k[0][i];
        }
        rhs(&stage, t + C2 * hs, &mut k1);
        k[1].copy_from_slice(&k1);
        for i in 0..dim {
            stage[i] = y[i] + hs * (A31 * k[0][i] + A32 * k[1][i]);
        }
        rhs(&stage, t + C3 * hs, &mut k1);
        k[2].copy_from_slice(&k1);
        for i in 0..dim {
            stage[i] = y[i] + hs * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        rhs(&stage, t + C4 * hs, &mut k1);
        k[3].copy_from_slice(&k1);
        for i in 0..dim {
            stage[i] = y[i] + hs * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        rhs(&stage, t + C5 * hs, &mut k1);
        k[4].copy_from_slice(&k1);
        for i in 0..dim {
            stage[i] = y[i]
                + hs * (A61 * k[0][i]
                    + A62 * k[1][i]
                    + A63 * k[2][i]
                    + A64 * k[3][i]
                    + A65 * k[4][i]);
        }
        rhs(&stage, t + hs, &mut k1);
        k[5].copy_from_slice(&k1);

        // 5th-order solution and FSAL stage.
        for i in 0..dim {
            y1[i] = y[i]
                + hs * (A71 * k[0][i]
                    + A73 * k[2][i]
                    + A74 * k[3][i]
                    + A75 * k[4][i]
                    + A76 * k[5][i]);
        }
        rhs(&y1, t + hs, &mut k1);
        k[6].copy_from_slice(&k1);

        for i in 0..dim {
            errv[i] = hs
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
        }

        let finite = y1.iter().all(|v| v.is_finite()) && errv.iter().all(|v| v.is_finite());
        let err = if finite {
            rms_scaled(&errv, &y, &y1, opts.tol)
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            if opts.store_dense {
                let mut cont = vec![0.0; 5 * dim];
                for i in 0..dim {
                    let ydiff = y1[i] - y[i];
                    let bspl = hs * k[0][i] - ydiff;
                    cont[i] = y[i];
                    cont[dim + i] = ydiff;
                    cont[2 * dim + i] = bspl;
                    cont[3 * dim + i] = ydiff - hs * k[6][i] - bspl;
                    cont[4 * dim + i] = hs
                        * (D1 * k[0][i]
                            + D3 * k[2][i]
                            + D4 * k[3][i]
                            + D5 * k[4][i]
                            + D6 * k[5][i]
                            + D7 * k[6][i]);
                }
                dense.push(DenseSeg { t0: t, h: hs, cont });
            }
            t += hs;
            y.copy_from_slice(&y1);
            let tmp = k[6].clone();
            k[0] = tmp; // FSAL
            times.push(t);
            states.extend_from_slice(&y);

            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, if rejected { 1.0 } else { FAC_MAX })
            };
            h *= fac;
            rejected = false;
            nonfinite_reject = false;
        } else {
            rejected = true;
            if !finite {
                nonfinite_reject = true;
                h *= 0.25;
            } else {
                h *= (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            }
        }
    }

    Ok(Trajectory::from_run(dim, times, states, dense, sig < 0.0))
}
