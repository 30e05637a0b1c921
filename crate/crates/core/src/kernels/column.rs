//! Vector-driven column-major SpMSpV and its two write-back strategies.

use rayon::slice::ParallelSliceMut;

use crate::error::Result;
use crate::kernels::partition::make_partition;
use crate::kernels::{
    check_dim, AtomicMode, KernelCounters, KernelOptions, MultiplyOutput, Workers, Workload, Writeback,
};
use crate::scalar::Scalar;
use crate::sparse::{CscMatrix, DenseVector, DualMatrix, SparseVector};

/// A contiguous piece of work: support slots `span`, and within them only
/// matrix entries whose running position falls in `items`.
struct Slice {
    span: std::ops::Range<usize>,
    items: Option<std::ops::Range<usize>>,
}

/// Visits every `(row, a_ij * x_j)` product of a worker's slice.
#[inline]
fn for_each_product<T: Scalar>(
    csc: &CscMatrix<T>,
    x: &SparseVector<T>,
    prefix: Option<&[usize]>,
    slice: &Slice,
    mut emit: impl FnMut(usize, T),
) -> usize {
    let offsets = csc.col_offsets();
    let rows = csc.row_indices();
    let vals = csc.values();
    let mut visited = 0;
    for k in slice.span.clone() {
        let j = x.indices()[k];
        let xj = x.values()[k];
        let (mut lo, mut hi) = (offsets[j], offsets[j + 1]);
        if let (Some(items), Some(prefix)) = (&slice.items, prefix) {
            // positions in the concatenated effective-nonzero stream
            let base = prefix[k];
            lo += items.start.saturating_sub(base).min(hi - lo);
            hi = offsets[j] + (items.end - base).min(hi - offsets[j]);
        }
        for p in lo..hi {
            emit(rows[p], vals[p] * xj);
        }
        visited += hi - lo;
    }
    visited
}

/// Sorts `(row, value)` pairs by row and sums each run into a dense output.
/// The sort is stable, so each row is summed in emission order and the
/// result does not depend on the worker count.
pub fn sort_and_reduce<T: Scalar>(mut pairs: Vec<(usize, T)>, rows: usize, workers: &Workers) -> DenseVector<T> {
    workers.install(|| pairs.par_sort_by_key(|p| p.0));
    let mut y = vec![T::zero(); rows];
    for (r, v) in reduce_by_key(&pairs) {
        y[r] = v;
    }
    DenseVector::new(y)
}

/// Sums runs of equal keys in key-sorted pairs.
pub fn reduce_by_key<T: Scalar>(sorted: &[(usize, T)]) -> Vec<(usize, T)> {
    let mut out: Vec<(usize, T)> = Vec::new();
    for &(k, v) in sorted {
        match out.last_mut() {
            Some((last, acc)) if *last == k => *acc += v,
            _ => out.push((k, v)),
        }
    }
    out
}

/// Column-major SpMSpV: reads exactly the columns listed in `x`.
pub fn spmspv_col<T: Scalar>(
    m: &DualMatrix<T>,
    x: &SparseVector<T>,
    workload: Workload,
    writeback: Writeback,
    workers: &Workers,
    opts: KernelOptions,
) -> Result<MultiplyOutput<T>> {
    check_dim(m.cols(), x.len())?;
    let csc = m.csc();
    let wc = workers.count();
    let support = x.nnz();

    let prefix: Option<Vec<usize>>;
    let slices: Vec<Slice> = match workload {
        Workload::Direct => {
            prefix = None;
            (0..wc).map(|w| Slice { span: w * support / wc..(w + 1) * support / wc, items: None }).collect()
        }
        Workload::LoadBalanced => {
            let offsets = csc.col_offsets();
            let mut p = Vec::with_capacity(support + 1);
            p.push(0);
            for &j in x.indices() {
                p.push(p.last().copied().unwrap_or(0) + offsets[j + 1] - offsets[j]);
            }
            let total = *p.last().expect("prefix has a first element");
            let part = make_partition(&p, total, wc)?;
            prefix = Some(p);
            part.ranges.into_iter().map(|r| Slice { span: r.span, items: Some(r.items) }).collect()
        }
    };
    let prefix = prefix.as_deref();
    let rows = m.rows();

    let out = match (writeback, opts.atomic_mode) {
        (Writeback::Atomic, AtomicMode::CompareAndSwap) => {
            let acc: Vec<T::Atomic> = (0..rows).map(|_| T::atomic_zero()).collect();
            let parts = workers.map(|w| {
                let mut retries = 0;
                let visited = for_each_product(csc, x, prefix, &slices[w], |r, v| {
                    retries += T::atomic_add(&acc[r], v);
                });
                KernelCounters {
                    values_read: visited,
                    atomic_updates: visited,
                    cas_retries: retries,
                    worker_loads: vec![visited],
                    ..Default::default()
                }
            });
            let y = acc.into_iter().map(T::atomic_into).collect();
            MultiplyOutput::new(y, KernelCounters::merge(parts))
        }
        (Writeback::Atomic, AtomicMode::PrivateReduce) => {
            let parts = workers.map(|w| {
                let mut local = vec![T::zero(); rows];
                let visited = for_each_product(csc, x, prefix, &slices[w], |r, v| local[r] += v);
                (local, visited)
            });
            let mut y = vec![T::zero(); rows];
            let mut counters = Vec::with_capacity(parts.len());
            for (local, visited) in parts {
                for (dst, v) in y.iter_mut().zip(local) {
                    *dst += v;
                }
                counters.push(KernelCounters {
                    values_read: visited,
                    atomic_updates: visited,
                    worker_loads: vec![visited],
                    ..Default::default()
                });
            }
            MultiplyOutput::new(y, KernelCounters::merge(counters))
        }
        (Writeback::Sort, _) => {
            let parts = workers.map(|w| {
                let mut pairs = Vec::new();
                for_each_product(csc, x, prefix, &slices[w], |r, v| pairs.push((r, v)));
                pairs
            });
            let mut counters = Vec::with_capacity(parts.len());
            let total: usize = parts.iter().map(Vec::len).sum();
            let mut pairs = Vec::with_capacity(total);
            for p in parts {
                counters.push(KernelCounters {
                    values_read: p.len(),
                    pairs_emitted: p.len(),
                    worker_loads: vec![p.len()],
                    ..Default::default()
                });
                pairs.extend(p);
            }
            let y = sort_and_reduce(pairs, rows, workers);
            MultiplyOutput::new(y.values, KernelCounters::merge(counters))
        }
    };
    Ok(out)
}
