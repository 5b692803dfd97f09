use super::OdeError;

/// Dense-output coefficients for one accepted integrator step.
///
/// Stores the quartic interpolant of the 5(4) pair in Horner-ready form over
/// the step `[t0, t0 + h]` (`h` may be negative for backward runs).
#[derive(Debug, Clone)]
pub(crate) struct DenseSeg {
    pub t0: f64,
    pub h: f64,
    /// Five coefficient blocks of length `dim` each.
    pub cont: Vec<f64>,
}

impl DenseSeg {
    fn eval_into(&self, dim: usize, t: f64, out: &mut [f64]) {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        for i in 0..dim {
            let c1 = self.cont[i];
            let c2 = self.cont[dim + i];
            let c3 = self.cont[2 * dim + i];
            let c4 = self.cont[3 * dim + i];
            let c5 = self.cont[4 * dim + i];
            out[i] = c1 + s * (c2 + s1 * (c3 + s * (c4 + s1 * c5)));
        }
    }
}

/// A time-stamped solution record with dense (continuous) output.
///
/// Times are strictly increasing. Angle-like components are stored unwrapped;
/// wrapping is the consumer's job.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    dense: Vec<DenseSeg>,
}

impl Trajectory {
    pub(crate) fn from_run(
        dim: usize,
        mut times: Vec<f64>,
        mut states: Vec<f64>,
        mut dense: Vec<DenseSeg>,
        backward: bool,
    ) -> Self {
        if backward {
            times.reverse();
            let n = times.len();
            let mut rev = vec![0.0; states.len()];
            for i in 0..n {
                rev[i * dim..(i + 1) * dim]
                    .copy_from_slice(&states[(n - 1 - i) * dim..(n - i) * dim]);
            }
            states = rev;
            dense.reverse();
        }
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
        Trajectory {
            dim,
            times,
            states,
            dense,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.first_time(), self.last_time())
    }

    /// Interpolate the state at `t`. At a stored time the stored state is
    /// returned exactly.
    pub fn sample_into(&self, t: f64, out: &mut [f64]) -> Result<(), OdeError> {
        let (lo, hi) = self.span();
        if t < lo || t > hi {
            return Err(OdeError::OutOfRange { t, lo, hi });
        }
        // partition_point: first index with times[i] > t, so seg = idx-1.
        let idx = self.times.partition_point(|&u| u <= t);
        if idx > 0 && self.times[idx - 1] == t {
            out.copy_from_slice(self.state(idx - 1));
            return Ok(());
        }
        let seg = &self.dense[idx - 1];
        seg.eval_into(self.dim, t, out);
        Ok(())
    }

    pub fn sample(&self, t: f64) -> Result<Vec<f64>, OdeError> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(t, &mut out)?;
        Ok(out)
    }

    pub fn sample_component(&self, t: f64, comp: usize) -> Result<f64, OdeError> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(t, &mut out)?;
        Ok(out[comp])
    }

    /// Uniform time grid covering the span with spacing at most `dt`
    /// (endpoints included).
    pub fn uniform_grid(&self, dt: f64) -> Vec<f64> {
        let (lo, hi) = self.span();
        let n = (((hi - lo) / dt).ceil() as usize).max(1);
        let step = (hi - lo) / n as f64;
        (0..=n).map(|i| lo + step * i as f64).collect()
    }

    /// Keep only the leading `keep` components of every state and dense block.
    pub(crate) fn project(&self, keep: usize) -> Trajectory {
        assert!(keep <= self.dim);
        let n = self.len();
        let mut states = Vec::with_capacity(n * keep);
        for i in 0..n {
            states.extend_from_slice(&self.states[i * self.dim..i * self.dim + keep]);
        }
        let dense = self
            .dense
            .iter()
            .map(|seg| {
                let mut cont = Vec::with_capacity(5 * keep);
                for b in 0..5 {
                    cont.extend_from_slice(&seg.cont[b * self.dim..b * self.dim + keep]);
                }
                DenseSeg {
                    t0: seg.t0,
                    h: seg.h,
                    cont,
                }
            })
            .collect();
        Trajectory {
            dim: keep,
            times: self.times.clone(),
            states,
            dense,
        }
    }

    /// Join consecutive pieces; each piece must start where the previous ends.
    pub(crate) fn concat(pieces: Vec<Trajectory>) -> Trajectory {
        let mut iter = pieces.into_iter();
        let mut acc = iter.next().expect("concat of empty list");
        for p in iter {
            debug_assert_eq!(acc.dim, p.dim);
            debug_assert!((acc.last_time() - p.first_time()).abs() < 1e-12);
            acc.times.extend_from_slice(&p.times[1..]);
            acc.states.extend_from_slice(&p.states[p.dim..]);
            acc.dense.extend(p.dense);
        }
        acc
    }
}
