//! Delta-propagation PageRank driven by the executor.

use crate::error::{invalid, Result};
use crate::kernels::VectorFormat;
use crate::runtime::{AdaptiveExecutor, InputVector, TraceStats};
use crate::scalar::Scalar;
use crate::sparse::{DenseVector, DualMatrix, SparseVector};

/// Propagation matrix for a graph whose row `i` lists the out-links of
/// vertex `i`: entry `(j, i)` is `1 / outdeg(i)` for each link `i -> j`.
/// Vertices without out-links get an empty column.
pub fn pagerank_matrix<T: Scalar>(graph: &DualMatrix<T>) -> Result<DualMatrix<T>> {
    if !graph.is_square() {
        return invalid("PageRank needs a square adjacency matrix");
    }
    let csr = graph.csr();
    let scaled = csr.map_values(|r, _, _| T::one() / T::from_usize(csr.row_degree(r)).expect("fits"));
    Ok(DualMatrix::from_csr(scaled.transpose()))
}

#[derive(Debug, Clone)]
pub struct PageRankResult<T> {
    pub rank: DenseVector<T>,
    pub iterations: usize,
    /// Delta support size fed to each multiplication.
    pub delta_sizes: Vec<usize>,
    pub converged: bool,
    /// L1 mass of all delta entries dropped by pruning.
    pub pruned_mass: f64,
    pub stats: TraceStats,
}

/// Accumulates `rank += delta` with `delta <- damping * M * delta`, starting
/// from `delta = 1/n` everywhere and dropping entries below `prune`. The
/// executor must run on [`pagerank_matrix`] of the graph. The fixed point
/// solves `rank = 1/n + damping * M * rank`; every pruned unit of delta
/// mass costs at most `1 / (1 - damping)` in the L1 distance to it.
pub fn pagerank_incremental<T: Scalar>(
    exec: &mut AdaptiveExecutor<T>,
    damping: f64,
    prune: f64,
    max_iters: usize,
) -> Result<PageRankResult<T>> {
    if !(damping > 0.0 && damping < 1.0) {
        return invalid(format!("damping {damping} must lie in (0, 1)"));
    }
    if !(prune >= 0.0) {
        return invalid("prune threshold must be nonnegative");
    }
    let n = exec.matrix().rows();
    if !exec.matrix().is_square() {
        return invalid("PageRank needs a square matrix");
    }
    let d = T::from_f64_lossy(damping);
    let mut rank = DenseVector::<T>::zeros(n);
    let mut delta: Vec<(usize, T)> = (0..n).map(|i| (i, T::one() / T::from_usize(n).expect("fits"))).collect();
    let mut reports = Vec::new();
    let mut delta_sizes = Vec::new();
    let mut iterations = 0;
    let mut pruned_mass = 0.0;
    while !delta.is_empty() && iterations < max_iters {
        for &(i, v) in &delta {
            rank.values[i] += v;
        }
        let x = match exec.preferred_format() {
            VectorFormat::Sparse => {
                let (idx, vals) = delta.iter().copied().unzip();
                InputVector::Sparse(SparseVector::new(n, idx, vals)?)
            }
            VectorFormat::Dense => {
                let mut dv = DenseVector::zeros(n);
                for &(i, v) in &delta {
                    dv.values[i] = v;
                }
                InputVector::Dense(dv)
            }
        };
        delta_sizes.push(delta.len());
        let it = exec.execute_iteration(x)?;
        iterations += 1;
        delta.clear();
        for (i, &v) in it.output.dense.values.iter().enumerate() {
            let v = v * d;
            let mag = v.abs().as_f64();
            if mag >= prune && !v.is_zero() {
                delta.push((i, v));
            } else {
                pruned_mass += mag;
            }
        }
        reports.push(it.report);
    }
    let converged = delta.is_empty();
    Ok(PageRankResult {
        rank,
        iterations,
        delta_sizes,
        converged,
        pruned_mass,
        stats: TraceStats::from_reports(reports),
    })
}
