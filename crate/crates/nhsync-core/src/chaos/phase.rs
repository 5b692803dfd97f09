use super::ChaosError;
use crate::TAU;

/// Phase of a chaotic oscillator from its section crossing times: linear
/// interpolation gaining `2 pi` per return,
/// `phi(t) = 2 pi (k + (t - t_k) / (t_{k+1} - t_k))`.
pub fn chaotic_phase(crossings: &[f64], t: f64) -> Result<f64, ChaosError> {
    if crossings.len() < 2 {
        return Err(ChaosError::InsufficientData(
            "need at least 2 crossings".into(),
        ));
    }
    let lo = crossings[0];
    let hi = crossings[crossings.len() - 1];
    if t < lo || t > hi {
        return Err(ChaosError::OutOfSpan { t, lo, hi });
    }
    let k = crossings.partition_point(|&c| c <= t);
    if k == crossings.len() {
        return Ok(TAU * (crossings.len() - 1) as f64);
    }
    let k = k - 1;
    Ok(TAU * (k as f64 + (t - crossings[k]) / (crossings[k + 1] - crossings[k])))
}

/// Sample the chaotic phase on a time grid.
pub fn chaotic_phase_series(crossings: &[f64], ts: &[f64]) -> Result<Vec<f64>, ChaosError> {
    ts.iter().map(|&t| chaotic_phase(crossings, t)).collect()
}
