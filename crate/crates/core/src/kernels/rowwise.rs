//! Matrix-driven row-major kernels: SpMV and bitmask-validated SpMSpV.

use crate::error::Result;
use crate::kernels::partition::make_partition;
use crate::kernels::workers::split_ranges_mut;
use crate::kernels::{check_dim, KernelCounters, MultiplyOutput, Workers, Workload};
use crate::scalar::Scalar;
use crate::sparse::{build_bitmask, CsrMatrix, DenseVector, DualMatrix, SparseVector};

/// Per-worker tallies of a row pass.
#[derive(Default)]
struct Tally {
    visited: usize,
    gathered: usize,
}

impl Tally {
    fn into_counters(self, validated: bool) -> KernelCounters {
        KernelCounters {
            values_read: self.gathered,
            mask_checks: if validated { self.visited } else { 0 },
            worker_loads: vec![self.visited],
            ..Default::default()
        }
    }
}

#[inline]
fn row_segment<T: Scalar, G>(csr: &CsrMatrix<T>, lo: usize, hi: usize, gather: &G, tally: &mut Tally) -> T
where
    G: Fn(usize) -> Option<T>,
{
    let cols = &csr.col_indices()[lo..hi];
    let vals = &csr.values()[lo..hi];
    let mut acc = T::zero();
    for (&c, &v) in cols.iter().zip(vals) {
        if let Some(xc) = gather(c) {
            acc += v * xc;
            tally.gathered += 1;
        }
    }
    tally.visited += hi - lo;
    acc
}

/// Direct distribution: worker `w` owns rows `[w*m/W, (w+1)*m/W)`.
fn row_pass_direct<T: Scalar, G>(csr: &CsrMatrix<T>, workers: &Workers, gather: G, validated: bool) -> MultiplyOutput<T>
where
    G: Fn(usize) -> Option<T> + Sync + Send,
{
    let m = csr.rows();
    let wc = workers.count();
    let mut y = vec![T::zero(); m];
    let bounds: Vec<_> = (0..wc).map(|w| w * m / wc..(w + 1) * m / wc).collect();
    let chunks = split_ranges_mut(&mut y, &bounds);
    let offsets = csr.row_offsets();
    let tallies = workers.map_chunks(chunks, |w, out| {
        let mut tally = Tally::default();
        let first = bounds[w].start;
        for (k, slot) in out.iter_mut().enumerate() {
            let r = first + k;
            *slot = row_segment(csr, offsets[r], offsets[r + 1], &gather, &mut tally);
        }
        tally.into_counters(validated)
    });
    MultiplyOutput::new(y, KernelCounters::merge(tallies))
}

/// Load-balanced distribution: equal nonzero ranges per worker. Rows lying
/// wholly inside a range are written by its worker; rows cut by a range
/// boundary are returned as partial sums and combined in worker order.
fn row_pass_balanced<T: Scalar, G>(
    csr: &CsrMatrix<T>,
    workers: &Workers,
    gather: G,
    validated: bool,
) -> Result<MultiplyOutput<T>>
where
    G: Fn(usize) -> Option<T> + Sync + Send,
{
    let offsets = csr.row_offsets();
    let part = make_partition(offsets, csr.nnz(), workers.count())?;
    // rows each worker owns outright
    let owned: Vec<_> = part
        .ranges
        .iter()
        .map(|wr| {
            if wr.span.is_empty() {
                return 0..0;
            }
            let mut lo = wr.span.start;
            let mut hi = wr.span.end;
            if offsets[lo] < wr.items.start {
                lo += 1;
            }
            if hi > lo && offsets[hi] > wr.items.end {
                hi -= 1;
            }
            lo..hi.max(lo)
        })
        .collect();
    // Empty owned ranges would break the increasing-order split; pin them to
    // the end of the previous range.
    let mut cursor = 0;
    let owned: Vec<_> = owned
        .into_iter()
        .map(|r| {
            let r = if r.is_empty() { cursor..cursor } else { r };
            cursor = r.end;
            r
        })
        .collect();

    let mut y = vec![T::zero(); csr.rows()];
    let chunks = split_ranges_mut(&mut y, &owned);
    let results = workers.map_chunks(chunks, |w, out| {
        let wr = &part.ranges[w];
        let mut tally = Tally::default();
        let mut carries: Vec<(usize, T)> = Vec::new();
        for r in wr.span.clone() {
            let lo = offsets[r].max(wr.items.start);
            let hi = offsets[r + 1].min(wr.items.end);
            let sum = row_segment(csr, lo, hi, &gather, &mut tally);
            if owned[w].contains(&r) {
                out[r - owned[w].start] = sum;
            } else {
                carries.push((r, sum));
            }
        }
        (carries, tally.into_counters(validated))
    });
    let mut counters = Vec::with_capacity(results.len());
    for (carries, c) in results {
        for (r, v) in carries {
            y[r] += v;
        }
        counters.push(c);
    }
    Ok(MultiplyOutput::new(y, KernelCounters::merge(counters)))
}

/// Traditional SpMV over a dense vector.
pub fn spmv<T: Scalar>(
    m: &DualMatrix<T>,
    x: &DenseVector<T>,
    workload: Workload,
    workers: &Workers,
) -> Result<MultiplyOutput<T>> {
    check_dim(m.cols(), x.len())?;
    let xv = &x.values;
    let gather = |c: usize| Some(xv[c]);
    match workload {
        Workload::Direct => Ok(row_pass_direct(m.csr(), workers, gather, false)),
        Workload::LoadBalanced => row_pass_balanced(m.csr(), workers, gather, false),
    }
}

/// Row-major SpMSpV: walks every matrix entry and accumulates only those
/// whose column is set in the bitmask of `x`'s support.
pub fn spmspv_row<T: Scalar>(
    m: &DualMatrix<T>,
    x: &SparseVector<T>,
    workload: Workload,
    workers: &Workers,
) -> Result<MultiplyOutput<T>> {
    check_dim(m.cols(), x.len())?;
    let mask = build_bitmask(x);
    let xv = x.values();
    let gather = |c: usize| if mask.contains(c) { Some(xv[mask.rank(c)]) } else { None };
    match workload {
        Workload::Direct => Ok(row_pass_direct(m.csr(), workers, gather, true)),
        Workload::LoadBalanced => row_pass_balanced(m.csr(), workers, gather, true),
    }
}
