use super::ChaosError;

/// Return-time statistics of a section: phase coherence means the return time
/// is nearly constant, i.e. a small `coherence_index`.
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    /// Mean return time.
    pub c: f64,
    /// Sample standard deviation of the return times.
    pub spread: f64,
    /// `spread / c`.
    pub coherence_index: f64,
    /// Number of return intervals.
    pub count: usize,
}

pub fn coherence(crossing_times: &[f64]) -> Result<CoherenceReport, ChaosError> {
    if crossing_times.len() < 11 {
        return Err(ChaosError::InsufficientData(
            "need at least 10 return intervals".into(),
        ));
    }
    let intervals: Vec<f64> = crossing_times.windows(2).map(|w| w[1] - w[0]).collect();
    if intervals.iter().any(|&d| d <= 0.0) {
        return Err(ChaosError::Invalid("crossing times must increase".into()));
    }
    let n = intervals.len();
    let c = intervals.iter().sum::<f64>() / n as f64;
    let var = intervals.iter().map(|d| (d - c) * (d - c)).sum::<f64>() / (n - 1) as f64;
    let spread = var.sqrt();
    Ok(CoherenceReport {
        c,
        spread,
        coherence_index: spread / c,
        count: n,
    })
}
