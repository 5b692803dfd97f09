//! Small dense linear algebra helpers. Dimensions here are tiny (state
//! dimensions and regression designs), so everything is plain `Vec<f64>`
//! row-major with O(n^3) algorithms.

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
/// `a` is n x n row-major and is consumed as scratch.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Some(b)
}

/// Least squares `min |x beta - y|` via normal equations.
/// `x` is m x p row-major with m >= p. Returns `beta`.
pub fn least_squares(x: &[f64], y: &[f64], p: usize) -> Option<Vec<f64>> {
    let m = y.len();
    assert_eq!(x.len(), m * p);
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for i in 0..m {
        let row = &x[i * p..(i + 1) * p];
        for a in 0..p {
            xty[a] += row[a] * y[i];
            for b in a..p {
                xtx[a * p + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx[a * p + b] = xtx[b * p + a];
        }
    }
    solve_dense(xtx, xty)
}

/// Modified Gram-Schmidt on `k` vectors of length `n`, stored contiguously.
/// Orthonormalizes in place and returns the diagonal of R (the norms after
/// removing earlier components). Runs a second pass for numerical safety.
pub fn mgs_orthonormalize(vecs: &mut [f64], n: usize, k: usize) -> Vec<f64> {
    assert_eq!(vecs.len(), n * k);
    let mut rdiag = vec![0.0; k];
    for j in 0..k {
        for _pass in 0..2 {
            for i in 0..j {
                let mut dot = 0.0;
                for t in 0..n {
                    dot += vecs[i * n + t] * vecs[j * n + t];
                }
                for t in 0..n {
                    vecs[j * n + t] -= dot * vecs[i * n + t];
                }
            }
        }
        let mut norm = 0.0;
        for t in 0..n {
            norm += vecs[j * n + t] * vecs[j * n + t];
        }
        let norm = norm.sqrt();
        rdiag[j] = norm;
        if norm > 1e-300 {
            for t in 0..n {
                vecs[j * n + t] /= norm;
            }
        }
    }
    rdiag
}

/// Max deviation of the Gram matrix of `k` vectors from the identity.
pub fn orthonormality_defect(vecs: &[f64], n: usize, k: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in i..k {
            let mut dot = 0.0;
            for t in 0..n {
                dot += vecs[i * n + t] * vecs[j * n + t];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// `out = m v` for a row-major `r x c` matrix.
pub fn matvec(m: &[f64], v: &[f64], r: usize, c: usize, out: &mut [f64]) {
    for i in 0..r {
        let mut s = 0.0;
        for j in 0..c {
            s += m[i * c + j] * v[j];
        }
        out[i] = s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        // [2 1; 1 3] x = [5; 10] -> x = (1, 3)
        let x = solve_dense(vec![2.0, 1.0, 1.0, 3.0], vec![5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_returns_none() {
        assert!(solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn least_squares_recovers_line() {
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let mut design = Vec::new();
        let mut y = Vec::new();
        for &t in &ts {
            design.push(1.0);
            design.push(t);
            y.push(0.7 + 2.5 * t);
        }
        let beta = least_squares(&design, &y, 2).unwrap();
        assert!((beta[0] - 0.7).abs() < 1e-10);
        assert!((beta[1] - 2.5).abs() < 1e-10);
    }

    #[test]
    fn mgs_produces_orthonormal_frame() {
        let mut v = vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0];
        let r = mgs_orthonormalize(&mut v, 3, 3);
        assert!(orthonormality_defect(&v, 3, 3) < 1e-12);
        assert!(r.iter().all(|&d| d > 0.0));
    }
}
