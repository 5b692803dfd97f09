use super::ChaosError;
use crate::ode::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// `n . x - offset` goes from negative to positive.
    Positive,
    Negative,
    Both,
}

/// A hyperplane section `n . x = offset` with a crossing direction filter.
#[derive(Debug, Clone)]
pub struct SectionSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub direction: CrossingDirection,
}

impl SectionSpec {
    pub fn new(normal: Vec<f64>, offset: f64, direction: CrossingDirection) -> Self {
        SectionSpec {
            normal,
            offset,
            direction,
        }
    }

    fn g(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(n, v)| n * v).sum::<f64>() - self.offset
    }
}

#[derive(Debug, Clone)]
pub struct Crossing {
    pub t: f64,
    pub state: Vec<f64>,
}

/// Locate section crossings on the dense output, bisected to 1e-9 time
/// accuracy. No crossings is an empty result, not an error.
pub fn section_crossings(
    traj: &Trajectory,
    sec: &SectionSpec,
) -> Result<Vec<Crossing>, ChaosError> {
    if sec.normal.len() != traj.dim() {
        return Err(ChaosError::Invalid(
            "section normal dimension mismatch".into(),
        ));
    }
    if sec.normal.iter().all(|&v| v == 0.0) {
        return Err(ChaosError::Invalid("section normal must be nonzero".into()));
    }

    const SUBDIV: usize = 8;
    let mut crossings = Vec::new();
    let mut buf = vec![0.0; traj.dim()];
    let times = traj.times();
    // classify samples by the sign predicate g > 0 (an exact zero counts as
    // the non-positive side) and bisect each transition
    let mut prev_t = times[0];
    traj.sample_into(prev_t, &mut buf)?;
    let mut prev_pos = sec.g(&buf) > 0.0;
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        for s in 1..=SUBDIV {
            let t = t0 + (t1 - t0) * s as f64 / SUBDIV as f64;
            traj.sample_into(t, &mut buf)?;
            let pos = sec.g(&buf) > 0.0;
            if pos != prev_pos {
                let rising = pos;
                let keep = match sec.direction {
                    CrossingDirection::Both => true,
                    CrossingDirection::Positive => rising,
                    CrossingDirection::Negative => !rising,
                };
                if keep {
                    let (mut lo, mut hi) = (prev_t, t);
                    while hi - lo > 1e-9 {
                        let mid = 0.5 * (lo + hi);
                        traj.sample_into(mid, &mut buf)?;
                        if (sec.g(&buf) > 0.0) == prev_pos {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let tc = 0.5 * (lo + hi);
                    traj.sample_into(tc, &mut buf)?;
                    crossings.push(Crossing {
                        t: tc,
                        state: buf.clone(),
                    });
                }
            }
            prev_t = t;
            prev_pos = pos;
        }
    }
    Ok(crossings)
}
