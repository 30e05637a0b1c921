//! Sparse matrix and vector storage, conversions and file formats.

mod binary;
mod bitmask;
mod compressed;
mod dual;
mod market;
mod vector;

pub use binary::{decode_binary, encode_binary, is_binary_cache, load_binary, load_matrix, save_binary};
pub use bitmask::{build_bitmask, BitMask};
pub use compressed::{csc_to_csr, csr_to_csc, CscMatrix, CsrMatrix};
pub use dual::{effective_nnz, DualMatrix};
pub use market::{
    load_matrix_market, load_vector_market, read_matrix_market, save_matrix_market, write_matrix_market,
    write_sparse_vector_market, VectorFile,
};
pub use vector::{dense_to_sparse, sparse_to_dense, DenseVector, SparseVector};
