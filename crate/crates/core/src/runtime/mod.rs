//! Adaptive execution, trace replay and training-data generation.

mod cost;
mod executor;
mod trace;
mod training;

pub use cost::{CostInputs, CostModel};
pub use executor::{AdaptiveExecutor, ExecutorConfig, InputVector, Iteration, IterationReport};
pub use trace::{
    fixed_kernel_totals, read_timing_table, regret, run_trace, run_trace_with, summary_line, write_stats_csv,
    write_timing_table, TimingTable, TraceStats,
};
pub use training::{
    benchmark_kernel, generate_training_data, random_sparse_vector, time_all_kernels, BenchConfig, DensitySweep, Timer,
    TrainingConfig,
};
