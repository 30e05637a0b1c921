//! Level-synchronous breadth-first search driven by the executor.

use crate::error::{invalid, Result};
use crate::kernels::VectorFormat;
use crate::runtime::{AdaptiveExecutor, InputVector, TraceStats};
use crate::scalar::Scalar;
use crate::sparse::{DenseVector, SparseVector};

/// Level of a vertex the search never reached.
pub const UNREACHED: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct BfsResult {
    pub levels: Vec<usize>,
    /// Frontier size fed to each multiplication.
    pub frontier_sizes: Vec<usize>,
    pub stats: TraceStats,
}

fn frontier<T: Scalar>(n: usize, members: &[usize], format: VectorFormat) -> InputVector<T> {
    match format {
        VectorFormat::Sparse => {
            InputVector::Sparse(SparseVector::from_sorted_unchecked(n, members.to_vec(), vec![T::one(); members.len()]))
        }
        VectorFormat::Dense => {
            let mut d = DenseVector::zeros(n);
            for &i in members {
                d.values[i] = T::one();
            }
            InputVector::Dense(d)
        }
    }
}

/// Vertex `i` joins the next frontier when `(A x)_i != 0` and it has no
/// level yet, so an entry `A[i][j]` acts as an edge `j -> i`. Values should
/// be nonnegative (a pattern matrix is typical) so sums cannot cancel.
pub fn bfs<T: Scalar>(exec: &mut AdaptiveExecutor<T>, source: usize) -> Result<BfsResult> {
    let n = exec.matrix().rows();
    if !exec.matrix().is_square() {
        return invalid("BFS needs a square matrix");
    }
    if source >= n {
        return invalid(format!("source {source} out of range for {n} vertices"));
    }
    let mut levels = vec![UNREACHED; n];
    levels[source] = 0;
    let mut current = vec![source];
    let mut reports = Vec::new();
    let mut frontier_sizes = Vec::new();
    let mut level = 0;
    while !current.is_empty() {
        let x = frontier::<T>(n, &current, exec.preferred_format());
        frontier_sizes.push(current.len());
        let it = exec.execute_iteration(x)?;
        level += 1;
        current.clear();
        for (i, v) in it.output.dense.values.iter().enumerate() {
            if !v.is_zero() && levels[i] == UNREACHED {
                levels[i] = level;
                current.push(i);
            }
        }
        reports.push(it.report);
    }
    Ok(BfsResult { levels, frontier_sizes, stats: TraceStats::from_reports(reports) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelId, Workers};
    use crate::runtime::ExecutorConfig;
    use crate::sparse::DualMatrix;
    use std::collections::VecDeque;
    use std::sync::Arc;

    pub(crate) fn queue_bfs(n: usize, edges: &[(usize, usize)], source: usize) -> Vec<usize> {
        // edges are (row, col) entries: col -> row
        let mut adj = vec![Vec::new(); n];
        for &(r, c) in edges {
            adj[c].push(r);
        }
        let mut level = vec![UNREACHED; n];
        level[source] = 0;
        let mut q = VecDeque::from([source]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if level[v] == UNREACHED {
                    level[v] = level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        level
    }

    fn exec(m: DualMatrix<f64>, k: KernelId) -> AdaptiveExecutor<f64> {
        let cfg =
            ExecutorConfig { workers: Some(Workers::new(3).unwrap()), force_kernel: Some(k), ..Default::default() };
        AdaptiveExecutor::new(Arc::new(m), None, cfg).unwrap()
    }

    #[test]
    fn path_graph() {
        let e = [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0), (2, 3, 1.0), (3, 2, 1.0)];
        let m = DualMatrix::from_triplets(4, 4, &e).unwrap();
        for k in KernelId::ALL {
            let r = bfs(&mut exec(m.clone(), k), 0).unwrap();
            assert_eq!(r.levels, vec![0, 1, 2, 3]);
            assert_eq!(r.stats.reports.len(), 4);
        }
    }

    #[test]
    fn isolated_vertex_unreached() {
        let e = [(0, 1, 1.0), (1, 0, 1.0)];
        let m = DualMatrix::from_triplets(3, 3, &e).unwrap();
        let r = bfs(&mut exec(m, KernelId::ColDirectAtomic), 1).unwrap();
        assert_eq!(r.levels, vec![1, 0, UNREACHED]);
    }

    #[test]
    fn rejects_bad_input() {
        let m = DualMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap();
        assert!(bfs(&mut exec(m, KernelId::RowDirect), 0).is_err());
        let m = DualMatrix::<f64>::identity(2);
        assert!(bfs(&mut exec(m, KernelId::RowDirect), 2).is_err());
    }

    #[test]
    fn directed_edges_follow_columns() {
        // entry (1, 0): edge 0 -> 1 only
        let m = DualMatrix::from_triplets(2, 2, &[(1, 0, 1.0)]).unwrap();
        let r = bfs(&mut exec(m.clone(), KernelId::SpmvDirect), 0).unwrap();
        assert_eq!(r.levels, vec![0, 1]);
        let r = bfs(&mut exec(m, KernelId::SpmvDirect), 1).unwrap();
        assert_eq!(r.levels, vec![UNREACHED, 0]);
        assert_eq!(queue_bfs(2, &[(1, 0)], 0), vec![0, 1]);
    }
}
