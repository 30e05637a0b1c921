//! Adaptive sparse matrix x (dense | sparse) vector multiplication.
//!
//! Every call picks one of eight kernels with three cascaded decision trees
//! (computing pattern, workload distribution, write-back) driven by cheap,
//! lazily evaluated matrix and vector features.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the width to [`Real`], which is `f64`
//! unless the `f32` feature is enabled.

pub mod apps;
pub mod error;
pub mod features;
pub mod kernels;
pub mod runtime;
pub mod scalar;
pub mod selector;
pub mod sparse;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default value width.
#[cfg(not(feature = "f32"))]
pub type Real = f64;
/// Default value width.
#[cfg(feature = "f32")]
pub type Real = f32;

pub type Csr = sparse::CsrMatrix<Real>;
pub type Csc = sparse::CscMatrix<Real>;
pub type Matrix = sparse::DualMatrix<Real>;
pub type Dense = sparse::DenseVector<Real>;
pub type Sparse = sparse::SparseVector<Real>;
