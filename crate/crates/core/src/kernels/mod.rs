//! The eight candidate multiplication kernels and their shared machinery.
//!
//! Three computing patterns survive the solution-space pruning:
//!
//! * column-major SpMSpV: vector-driven, reads only the columns listed in
//!   `x`, needs a write-back strategy because columns scatter into rows;
//! * row-major SpMSpV: matrix-driven, validates every entry against a
//!   bitmask of `x`'s support;
//! * SpMV: matrix-driven, no validation, dense `x`.
//!
//! Each pattern comes in a direct (whole rows/columns per worker) and a
//! load-balanced (equal nonzero ranges per worker) flavour; column-major
//! additionally splits into atomic and sort-then-reduce write-back.

mod column;
mod partition;
mod reference;
mod rowwise;
mod workers;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{dense_to_sparse, DenseVector, DualMatrix, SparseVector};

pub use column::{reduce_by_key, sort_and_reduce, spmspv_col};
pub use partition::{make_partition, WorkPartition, WorkerRange};
pub use reference::reference_multiply;
pub use rowwise::{spmspv_row, spmv};
pub use workers::{Workers, THREADS_ENV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    ColSpMSpV,
    RowSpMSpV,
    SpMV,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Workload {
    Direct,
    LoadBalanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Writeback {
    Atomic,
    Sort,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::ColSpMSpV, Pattern::RowSpMSpV, Pattern::SpMV];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Vector representation the pattern consumes.
    pub fn vector_format(self) -> VectorFormat {
        match self {
            Pattern::SpMV => VectorFormat::Dense,
            Pattern::ColSpMSpV | Pattern::RowSpMSpV => VectorFormat::Sparse,
        }
    }
}

impl Workload {
    pub const ALL: [Workload; 2] = [Workload::Direct, Workload::LoadBalanced];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl Writeback {
    pub const ALL: [Writeback; 2] = [Writeback::Atomic, Writeback::Sort];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VectorFormat {
    Dense,
    Sparse,
}

/// One of the eight valid kernel variants. The discriminant is the stable
/// integer id used in CSV files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelId {
    SpmvDirect = 0,
    SpmvBalanced = 1,
    RowDirect = 2,
    RowBalanced = 3,
    ColDirectAtomic = 4,
    ColDirectSort = 5,
    ColBalancedAtomic = 6,
    ColBalancedSort = 7,
}

impl KernelId {
    pub const ALL: [KernelId; 8] = [
        KernelId::SpmvDirect,
        KernelId::SpmvBalanced,
        KernelId::RowDirect,
        KernelId::RowBalanced,
        KernelId::ColDirectAtomic,
        KernelId::ColDirectSort,
        KernelId::ColBalancedAtomic,
        KernelId::ColBalancedSort,
    ];

    /// Builds an id; `writeback` is required for column-major SpMSpV and
    /// must be absent otherwise.
    pub fn from_parts(pattern: Pattern, workload: Workload, writeback: Option<Writeback>) -> Result<Self> {
        use KernelId::*;
        let id = match (pattern, workload, writeback) {
            (Pattern::SpMV, Workload::Direct, None) => SpmvDirect,
            (Pattern::SpMV, Workload::LoadBalanced, None) => SpmvBalanced,
            (Pattern::RowSpMSpV, Workload::Direct, None) => RowDirect,
            (Pattern::RowSpMSpV, Workload::LoadBalanced, None) => RowBalanced,
            (Pattern::ColSpMSpV, Workload::Direct, Some(Writeback::Atomic)) => ColDirectAtomic,
            (Pattern::ColSpMSpV, Workload::Direct, Some(Writeback::Sort)) => ColDirectSort,
            (Pattern::ColSpMSpV, Workload::LoadBalanced, Some(Writeback::Atomic)) => ColBalancedAtomic,
            (Pattern::ColSpMSpV, Workload::LoadBalanced, Some(Writeback::Sort)) => ColBalancedSort,
            other => return Err(Error::InvalidInput(format!("invalid kernel combination {other:?}"))),
        };
        Ok(id)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn pattern(self) -> Pattern {
        use KernelId::*;
        match self {
            SpmvDirect | SpmvBalanced => Pattern::SpMV,
            RowDirect | RowBalanced => Pattern::RowSpMSpV,
            _ => Pattern::ColSpMSpV,
        }
    }

    pub fn workload(self) -> Workload {
        use KernelId::*;
        match self {
            SpmvDirect | RowDirect | ColDirectAtomic | ColDirectSort => Workload::Direct,
            _ => Workload::LoadBalanced,
        }
    }

    pub fn writeback(self) -> Option<Writeback> {
        use KernelId::*;
        match self {
            ColDirectAtomic | ColBalancedAtomic => Some(Writeback::Atomic),
            ColDirectSort | ColBalancedSort => Some(Writeback::Sort),
            _ => None,
        }
    }

    pub fn vector_format(self) -> VectorFormat {
        self.pattern().vector_format()
    }

    pub fn name(self) -> &'static str {
        use KernelId::*;
        match self {
            SpmvDirect => "spmv-direct",
            SpmvBalanced => "spmv-lb",
            RowDirect => "row-direct",
            RowBalanced => "row-lb",
            ColDirectAtomic => "col-direct-atomic",
            ColDirectSort => "col-direct-sort",
            ColBalancedAtomic => "col-lb-atomic",
            ColBalancedSort => "col-lb-sort",
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelId {
    type Err = Error;

    /// Accepts the kernel name or its integer id.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(i) = s.parse::<usize>() {
            return KernelId::from_index(i).ok_or_else(|| Error::InvalidInput(format!("no kernel with id {i}")));
        }
        KernelId::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown kernel '{s}'")))
    }
}

/// How atomic write-back accumulates into the shared output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AtomicMode {
    /// Lock-free compare-and-swap on each output slot.
    #[default]
    CompareAndSwap,
    /// Per-worker private dense accumulators, summed in worker order.
    PrivateReduce,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KernelOptions {
    pub atomic_mode: AtomicMode,
}

/// Instrumentation gathered during one kernel call.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KernelCounters {
    /// Matrix values multiplied into the result.
    pub values_read: usize,
    /// Bitmask membership tests (row-major SpMSpV).
    pub mask_checks: usize,
    /// `(row, value)` pairs emitted by the sort write-back.
    pub pairs_emitted: usize,
    /// Atomic accumulations performed.
    pub atomic_updates: usize,
    /// Failed compare-and-swap attempts.
    pub cas_retries: usize,
    /// Matrix entries visited by each worker.
    pub worker_loads: Vec<usize>,
}

impl KernelCounters {
    pub(crate) fn merge(parts: impl IntoIterator<Item = KernelCounters>) -> KernelCounters {
        let mut out = KernelCounters::default();
        for p in parts {
            out.values_read += p.values_read;
            out.mask_checks += p.mask_checks;
            out.pairs_emitted += p.pairs_emitted;
            out.atomic_updates += p.atomic_updates;
            out.cas_retries += p.cas_retries;
            out.worker_loads.extend(p.worker_loads);
        }
        out
    }
}

/// Result of one multiplication: always dense, with an optional sparse view.
#[derive(Debug, Clone)]
pub struct MultiplyOutput<T> {
    pub dense: DenseVector<T>,
    pub sparse: Option<SparseVector<T>>,
    pub counters: KernelCounters,
}

impl<T: Scalar> MultiplyOutput<T> {
    pub(crate) fn new(dense: Vec<T>, counters: KernelCounters) -> Self {
        Self { dense: DenseVector::new(dense), sparse: None, counters }
    }

    pub fn materialize_sparse(&mut self) -> &SparseVector<T> {
        let dense = &self.dense;
        self.sparse.get_or_insert_with(|| dense_to_sparse(dense))
    }
}

/// Borrowed input vector in either representation.
#[derive(Debug, Clone, Copy)]
pub enum VectorRef<'a, T> {
    Dense(&'a DenseVector<T>),
    Sparse(&'a SparseVector<T>),
}

impl<'a, T: Scalar> VectorRef<'a, T> {
    pub fn len(&self) -> usize {
        match self {
            VectorRef::Dense(d) => d.len(),
            VectorRef::Sparse(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn format(&self) -> VectorFormat {
        match self {
            VectorRef::Dense(_) => VectorFormat::Dense,
            VectorRef::Sparse(_) => VectorFormat::Sparse,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Dispatches `id` on a vector already in the kernel's format.
pub fn run_kernel<T: Scalar>(
    id: KernelId,
    m: &DualMatrix<T>,
    x: VectorRef<'_, T>,
    workers: &Workers,
    opts: KernelOptions,
) -> Result<MultiplyOutput<T>> {
    match (id.pattern(), x) {
        (Pattern::SpMV, VectorRef::Dense(d)) => spmv(m, d, id.workload(), workers),
        (Pattern::RowSpMSpV, VectorRef::Sparse(s)) => spmspv_row(m, s, id.workload(), workers),
        (Pattern::ColSpMSpV, VectorRef::Sparse(s)) => {
            let wb = id.writeback().expect("column kernels carry a write-back");
            spmspv_col(m, s, id.workload(), wb, workers, opts)
        }
        (_, x) => Err(Error::InvalidInput(format!("kernel {id} cannot consume a {:?} vector", x.format()))),
    }
}
