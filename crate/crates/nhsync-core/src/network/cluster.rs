use crate::sync::{detect_mn_locking_slices, LockRatio, PhaseSeries};

/// Pairwise locking verdicts; `matrix[i][j]` describes phases (i, j) in the
/// `m theta_j - n theta_i` convention, so `matrix[j][i]` carries the swapped
/// ratio.
pub type SyncMatrix = Vec<Vec<Option<LockRatio>>>;

/// Run the m:n detector on every node pair of a multi-component series.
pub fn sync_matrix(
    phases: &PhaseSeries,
    m_max: u32,
    n_max: u32,
    bound: f64,
    discard_fraction: f64,
) -> SyncMatrix {
    let n = phases.n_components();
    let start = ((phases.len() as f64 * discard_fraction) as usize).min(phases.len() - 2);
    let mut matrix: SyncMatrix = vec![vec![None; n]; n];
    for i in 0..n {
        matrix[i][i] = Some(LockRatio {
            m: 1,
            n: 1,
            residual: 0.0,
        });
        for j in i + 1..n {
            let lock = detect_mn_locking_slices(
                &phases.component(i)[start..],
                &phases.component(j)[start..],
                m_max,
                n_max,
                bound,
            );
            matrix[i][j] = lock;
            matrix[j][i] = lock.map(|l| l.swapped());
        }
    }
    matrix
}

/// Connected components of the locked-pair graph, optionally restricted to a
/// fixed ratio (counted either way round). Clusters and members are sorted,
/// so the output is deterministic.
pub fn find_clusters(matrix: &SyncMatrix, require_ratio: Option<(u32, u32)>) -> Vec<Vec<usize>> {
    let n = matrix.len();
    let mut parent: Vec<usize> = (0..n).collect();

    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    for i in 0..n {
        for j in i + 1..n {
            let Some(lock) = matrix[i][j] else { continue };
            let ok = match require_ratio {
                None => true,
                Some((m0, n0)) => (lock.m, lock.n) == (m0, n0) || (lock.m, lock.n) == (n0, m0),
            };
            if ok {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}
