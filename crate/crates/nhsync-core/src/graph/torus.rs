use super::GraphError;
use crate::TAU;
use std::io::{BufRead, Write};

/// A discretized graph `rho: T^m -> R^p` on a uniform torus grid with
/// periodic cubic (Catmull-Rom) interpolation. The interpolant matches the
/// node values exactly and is C1 across the periodic seam.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGraph {
    dims: Vec<usize>,
    components: usize,
    values: Vec<f64>,
}

impl TorusGraph {
    pub fn constant(dims: Vec<usize>, value: &[f64]) -> Self {
        let n: usize = dims.iter().product();
        let mut values = Vec::with_capacity(n * value.len());
        for _ in 0..n {
            values.extend_from_slice(value);
        }
        TorusGraph {
            dims,
            components: value.len(),
            values,
        }
    }

    /// Build from a function of the node angles.
    pub fn from_fn(dims: Vec<usize>, components: usize, f: impl Fn(&[f64], &mut [f64])) -> Self {
        let n: usize = dims.iter().product();
        let mut values = vec![0.0; n * components];
        let mut angles = vec![0.0; dims.len()];
        for node in 0..n {
            node_angles(&dims, node, &mut angles);
            f(
                &angles,
                &mut values[node * components..(node + 1) * components],
            );
        }
        TorusGraph {
            dims,
            components,
            values,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn torus_dim(&self) -> usize {
        self.dims.len()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node_value(&self, node: usize) -> &[f64] {
        &self.values[node * self.components..(node + 1) * self.components]
    }

    pub fn set_node_value(&mut self, node: usize, v: &[f64]) {
        self.values[node * self.components..(node + 1) * self.components].copy_from_slice(v);
    }

    /// Angles of grid node `node` (row-major flat index).
    pub fn angles_of(&self, node: usize, out: &mut [f64]) {
        node_angles(&self.dims, node, out);
    }

    /// Periodic cubic interpolation at arbitrary angles.
    pub fn eval(&self, angles: &[f64], out: &mut [f64]) {
        self.eval_kernel(angles, None, out);
    }

    /// Partial derivative of the interpolant along torus dimension `axis`.
    pub fn eval_partial(&self, angles: &[f64], axis: usize, out: &mut [f64]) {
        self.eval_kernel(angles, Some(axis), out);
    }

    fn eval_kernel(&self, angles: &[f64], d_axis: Option<usize>, out: &mut [f64]) {
        let m = self.dims.len();
        debug_assert_eq!(angles.len(), m);
        debug_assert!(m <= 4, "torus dimension too large");
        let p = self.components;

        let mut base = [0usize; 4];
        let mut w = [[0.0f64; 4]; 4];
        for d in 0..m {
            let n = self.dims[d];
            let h = TAU / n as f64;
            let u = angles[d].rem_euclid(TAU) / h;
            let mut i = u.floor() as usize;
            let mut s = u - i as f64;
            if i >= n {
                // u == n can occur from rounding at the seam
                i = 0;
                s = 0.0;
            }
            base[d] = i;
            if d_axis == Some(d) {
                let dw = [
                    (-1.5 * s + 2.0) * s - 0.5,
                    (4.5 * s - 5.0) * s,
                    (-4.5 * s + 4.0) * s + 0.5,
                    (1.5 * s - 1.0) * s,
                ];
                for q in 0..4 {
                    w[d][q] = dw[q] / h;
                }
            } else {
                w[d][0] = ((-0.5 * s + 1.0) * s - 0.5) * s;
                w[d][1] = (1.5 * s - 2.5) * s * s + 1.0;
                w[d][2] = ((-1.5 * s + 2.0) * s + 0.5) * s;
                w[d][3] = (0.5 * s - 0.5) * s * s;
            }
        }

        out.fill(0.0);
        let combos = 1usize << (2 * m); // 4^m
        for combo in 0..combos {
            let mut weight = 1.0;
            let mut flat = 0usize;
            let mut c = combo;
            for d in 0..m {
                let off = c & 3;
                c >>= 2;
                weight *= w[d][off];
                let n = self.dims[d];
                let idx = (base[d] + n + off - 1) % n;
                flat = flat * n + idx;
            }
            if weight == 0.0 {
                continue;
            }
            let v = &self.values[flat * p..(flat + 1) * p];
            for j in 0..p {
                out[j] += weight * v[j];
            }
        }
    }

    /// Sup distance to another graph on the identical grid.
    pub fn sup_distance(&self, other: &TorusGraph) -> f64 {
        assert_eq!(self.dims, other.dims);
        assert_eq!(self.components, other.components);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Sup distance to a constant value.
    pub fn sup_distance_to_const(&self, value: &[f64]) -> f64 {
        assert_eq!(value.len(), self.components);
        let mut worst: f64 = 0.0;
        for node in 0..self.node_count() {
            for (a, b) in self.node_value(node).iter().zip(value) {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Max gradient magnitude estimated from nearest-neighbour differences.
    pub fn lipschitz_estimate(&self) -> f64 {
        let m = self.dims.len();
        let p = self.components;
        let mut worst: f64 = 0.0;
        let mut idx = vec![0usize; m];
        for node in 0..self.node_count() {
            node_multi_index(&self.dims, node, &mut idx);
            for d in 0..m {
                let n = self.dims[d];
                let h = TAU / n as f64;
                let mut nb = idx.clone();
                nb[d] = (idx[d] + 1) % n;
                let flat = flat_index(&self.dims, &nb);
                for j in 0..p {
                    let diff = (self.values[flat * p + j] - self.values[node * p + j]).abs();
                    worst = worst.max(diff / h);
                }
            }
        }
        worst
    }

    /// CSV with one row per node: grid indices then component values.
    /// Floats are shortest round-trip decimals, so the round trip is
    /// bit-exact.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = self.dims.len();
        let mut header: Vec<String> = (0..m).map(|d| format!("i{d}")).collect();
        header.extend((0..self.components).map(|j| format!("r{j}")));
        writeln!(w, "{}", header.join(","))?;
        let mut idx = vec![0usize; m];
        for node in 0..self.node_count() {
            node_multi_index(&self.dims, node, &mut idx);
            let mut fields: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            fields.extend(self.node_value(node).iter().map(|v| format!("{v}")));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// JSON sidecar with the grid metadata needed to rebuild the graph.
    pub fn meta_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dims": self.dims,
            "components": self.components,
            "angle_spacing": self.dims.iter().map(|&n| TAU / n as f64).collect::<Vec<_>>(),
        })
    }

    /// Rebuild from the CSV body and sidecar metadata.
    pub fn read_csv<R: BufRead>(r: R, meta: &serde_json::Value) -> Result<Self, GraphError> {
        let dims: Vec<usize> = meta["dims"]
            .as_array()
            .ok_or_else(|| GraphError::Io("sidecar missing dims".into()))?
            .iter()
            .map(|v| v.as_u64().unwrap_or(0) as usize)
            .collect();
        let components = meta["components"]
            .as_u64()
            .ok_or_else(|| GraphError::Io("sidecar missing components".into()))?
            as usize;
        let n: usize = dims.iter().product();
        let m = dims.len();
        let mut values = vec![0.0; n * components];
        let mut seen = 0usize;
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
            if lineno == 0 {
                continue; // header
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != m + components {
                return Err(GraphError::Io(format!(
                    "row {lineno}: expected {} fields, got {}",
                    m + components,
                    fields.len()
                )));
            }
            let mut idx = vec![0usize; m];
            for d in 0..m {
                idx[d] = fields[d]
                    .parse()
                    .map_err(|_| GraphError::Io(format!("row {lineno}: bad index")))?;
            }
            let flat = flat_index(&dims, &idx);
            for j in 0..components {
                values[flat * components + j] = fields[m + j]
                    .parse()
                    .map_err(|_| GraphError::Io(format!("row {lineno}: bad value")))?;
            }
            seen += 1;
        }
        if seen != n {
            return Err(GraphError::Io(format!("expected {n} rows, got {seen}")));
        }
        Ok(TorusGraph {
            dims,
            components,
            values,
        })
    }
}

pub(crate) fn node_multi_index(dims: &[usize], mut node: usize, out: &mut [usize]) {
    for d in (0..dims.len()).rev() {
        out[d] = node % dims[d];
        node /= dims[d];
    }
}

pub(crate) fn flat_index(dims: &[usize], idx: &[usize]) -> usize {
    let mut flat = 0;
    for d in 0..dims.len() {
        flat = flat * dims[d] + idx[d];
    }
    flat
}

pub(crate) fn node_angles(dims: &[usize], node: usize, out: &mut [f64]) {
    let mut rem = node;
    for d in (0..dims.len()).rev() {
        let i = rem % dims[d];
        rem /= dims[d];
        out[d] = TAU * i as f64 / dims[d] as f64;
    }
}
