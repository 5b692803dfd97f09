use super::{PhaseSeries, SyncError};

/// A detected m:n resonance: phase 1 makes `m` revolutions while phase 2
/// makes `n`, with `residual` the sup of `|m theta2 - n theta1 - const|`
/// over the post-transient window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockRatio {
    pub m: u32,
    pub n: u32,
    pub residual: f64,
}

impl LockRatio {
    pub fn swapped(&self) -> LockRatio {
        LockRatio {
            m: self.n,
            n: self.m,
            residual: self.residual,
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Find the coprime `(m, n)` with `m <= m_max`, `n <= n_max` minimizing the
/// sup-variation of `m theta2 - n theta1` over the post-transient window;
/// report it when that variation is below `bound`.
pub fn detect_mn_locking(
    ps1: &PhaseSeries,
    ps2: &PhaseSeries,
    m_max: u32,
    n_max: u32,
    bound: f64,
    discard_fraction: f64,
) -> Result<Option<LockRatio>, SyncError> {
    if ps1.len() != ps2.len() {
        return Err(SyncError::GridMismatch("series lengths differ".into()));
    }
    let scale = ps1.span().abs().max(1.0);
    for (a, b) in ps1.times().iter().zip(ps2.times()) {
        if (a - b).abs() > 1e-9 * scale {
            return Err(SyncError::GridMismatch("time grids differ".into()));
        }
    }
    let start = ps1.discard_index(discard_fraction);
    Ok(detect_mn_locking_slices(
        &ps1.component(0)[start..],
        &ps2.component(0)[start..],
        m_max,
        n_max,
        bound,
    ))
}

/// Core detector over pre-trimmed unwrapped phase slices.
pub fn detect_mn_locking_slices(
    th1: &[f64],
    th2: &[f64],
    m_max: u32,
    n_max: u32,
    bound: f64,
) -> Option<LockRatio> {
    debug_assert_eq!(th1.len(), th2.len());
    let mut best: Option<LockRatio> = None;
    for m in 1..=m_max {
        for n in 1..=n_max {
            if gcd(m, n) != 1 {
                continue;
            }
            let (mf, nf) = (m as f64, n as f64);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (&a, &b) in th1.iter().zip(th2) {
                let s = mf * b - nf * a;
                lo = lo.min(s);
                hi = hi.max(s);
            }
            let variation = 0.5 * (hi - lo);
            if variation < bound && best.map_or(true, |b| variation < b.residual) {
                best = Some(LockRatio {
                    m,
                    n,
                    residual: variation,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> PhaseSeries {
        let times: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
        let vals: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        PhaseSeries::single(times, vals).unwrap()
    }

    #[test]
    fn identical_series_lock_one_to_one() {
        let a = series(|t| t, 200.0, 2000);
        let b = series(|t| t, 200.0, 2000);
        let lock = detect_mn_locking(&a, &b, 8, 8, super::super::DEFAULT_LOCK_BOUND, 0.2)
            .unwrap()
            .unwrap();
        assert_eq!((lock.m, lock.n), (1, 1));
        assert!(lock.residual < 1e-12);
    }

    #[test]
    fn three_two_resonance_detected() {
        let a = series(|t| t, 400.0, 4000);
        let b = series(|t| 2.0 / 3.0 * t + 0.1 * t.sin(), 400.0, 4000);
        let lock = detect_mn_locking(&a, &b, 8, 8, super::super::DEFAULT_LOCK_BOUND, 0.2)
            .unwrap()
            .unwrap();
        assert_eq!((lock.m, lock.n), (3, 2));
        assert!(lock.residual <= 0.3 + 1e-12, "residual {}", lock.residual);
    }

    #[test]
    fn golden_mean_pair_unlocked() {
        let phi = 0.5 * (1.0 + 5.0f64.sqrt());
        let a = series(|t| t, 600.0, 6000);
        let b = series(move |t| phi * t, 600.0, 6000);
        let lock =
            detect_mn_locking(&a, &b, 12, 12, super::super::DEFAULT_LOCK_BOUND, 0.2).unwrap();
        assert!(lock.is_none(), "got {lock:?}");
    }

    #[test]
    fn swap_symmetry() {
        let a = series(|t| t, 400.0, 3000);
        let b = series(|t| 2.0 / 3.0 * t + 0.05 * (0.7 * t).sin(), 400.0, 3000);
        let ab = detect_mn_locking(&a, &b, 8, 8, super::super::DEFAULT_LOCK_BOUND, 0.2)
            .unwrap()
            .unwrap();
        let ba = detect_mn_locking(&b, &a, 8, 8, super::super::DEFAULT_LOCK_BOUND, 0.2)
            .unwrap()
            .unwrap();
        assert_eq!((ab.m, ab.n), (ba.n, ba.m));
        assert!((ab.residual - ba.residual).abs() < 1e-12);
    }
}
