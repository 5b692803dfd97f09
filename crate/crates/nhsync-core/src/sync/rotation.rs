use super::{PhaseSeries, SyncError};

/// Rotation number of one component: least-squares slope of the unwrapped
/// phase against time, in cycles per unit time, with a split-half error
/// estimate.
pub fn rotation_number(
    ps: &PhaseSeries,
    component: usize,
    discard_fraction: f64,
) -> Result<(f64, f64), SyncError> {
    if !(0.0..0.5).contains(&discard_fraction) {
        return Err(SyncError::Invalid(
            "discard_fraction must be in [0, 0.5)".into(),
        ));
    }
    if component >= ps.n_components() {
        return Err(SyncError::Invalid("no such component".into()));
    }
    let start = ps.discard_index(discard_fraction);
    let ts = &ps.times()[start..];
    let th = &ps.component(component)[start..];
    if ts.len() < 8 {
        return Err(SyncError::InsufficientData(
            "need at least 8 post-transient samples".into(),
        ));
    }
    let full = slope(ts, th) / crate::TAU;
    let mid = ts.len() / 2;
    let s1 = slope(&ts[..mid], &th[..mid]) / crate::TAU;
    let s2 = slope(&ts[mid..], &th[mid..]) / crate::TAU;
    Ok((full, 0.5 * (s1 - s2).abs()))
}

fn slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (&t, &y) in ts.iter().zip(ys) {
        cov += (t - tm) * (y - ym);
        var += (t - tm) * (t - tm);
    }
    cov / var
}
