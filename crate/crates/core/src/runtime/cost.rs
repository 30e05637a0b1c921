//! Deterministic kernel cost model.
//!
//! Prices a kernel run from its counters as if each logical worker were a
//! separate core: the busiest worker sets the parallel term, and fixed
//! setup passes are charged serially. Used where timings must replay
//! exactly, e.g. when two pipeline runs are compared byte for byte.

use crate::kernels::{KernelCounters, KernelId, Pattern, Workload, Writeback};

/// Per-operation prices in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub launch_ns: f64,
    pub per_worker_ns: f64,
    pub entry_ns: f64,
    pub mask_check_ns: f64,
    pub atomic_ns: f64,
    /// Extra atomic price per additional update landing on the same row.
    pub contention_ns: f64,
    pub sort_ns: f64,
    pub sort_setup_ns: f64,
    pub reduce_ns: f64,
    pub row_write_ns: f64,
    pub partition_ns: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            launch_ns: 2000.0,
            per_worker_ns: 150.0,
            entry_ns: 1.0,
            mask_check_ns: 0.4,
            atomic_ns: 1.5,
            contention_ns: 2.0,
            sort_ns: 0.3,
            sort_setup_ns: 1500.0,
            reduce_ns: 0.7,
            row_write_ns: 0.25,
            partition_ns: 4.0,
        }
    }
}

/// Structural sizes the counters do not carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostInputs {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub nnz_x: usize,
    /// Nonzero rows of the product.
    pub output_nnz: usize,
    pub workers: usize,
}

impl CostModel {
    /// Modelled seconds for one run of `id`.
    pub fn seconds(&self, id: KernelId, c: &KernelCounters, s: CostInputs) -> f64 {
        let w = s.workers.max(1) as f64;
        let busiest = c.worker_loads.iter().copied().max().unwrap_or(0) as f64;
        let mut ns = self.launch_ns + self.per_worker_ns * w;
        if id.workload() == Workload::LoadBalanced {
            let span = match id.pattern() {
                Pattern::ColSpMSpV => s.nnz_x,
                _ => s.rows,
            };
            ns += self.partition_ns * w * ((span + 1) as f64).log2();
        }
        match id.pattern() {
            Pattern::SpMV => {
                ns += self.entry_ns * busiest + self.row_write_ns * s.rows as f64 / w;
            }
            Pattern::RowSpMSpV => {
                // bitmask build over the column range plus per-row validation
                ns += self.row_write_ns * (s.cols as f64 / 64.0 + s.nnz_x as f64);
                ns += (self.entry_ns + self.mask_check_ns) * busiest + self.row_write_ns * s.rows as f64 / w;
            }
            Pattern::ColSpMSpV => {
                ns += self.row_write_ns * s.rows as f64 / w;
                if id.workload() == Workload::LoadBalanced {
                    ns += self.row_write_ns * s.nnz_x as f64;
                }
                match id.writeback().expect("column kernels carry a write-back") {
                    Writeback::Atomic => {
                        let per_row = c.atomic_updates as f64 / s.output_nnz.max(1) as f64;
                        let price = self.atomic_ns + self.contention_ns * (per_row - 1.0).max(0.0).min(w - 1.0);
                        ns += (self.entry_ns + price) * busiest;
                    }
                    Writeback::Sort => {
                        let p = c.pairs_emitted as f64;
                        ns += self.entry_ns * busiest;
                        ns += self.sort_setup_ns + (self.sort_ns * p * (p + 1.0).log2() + self.reduce_ns * p) / w;
                    }
                }
            }
        }
        ns * 1e-9
    }
}
