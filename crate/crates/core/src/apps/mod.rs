//! Driver applications that produce varied-sparsity vector streams.

mod bfs;
mod pagerank;
mod synth;

pub use bfs::{bfs, BfsResult, UNREACHED};
pub use pagerank::{pagerank_incremental, pagerank_matrix, PageRankResult};
pub use synth::{generate_synthetic, SynthKind, SynthSpec};
