use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{CscMatrix, CsrMatrix, SparseVector};

/// One matrix held in both compressed layouts, so row-major and
/// column-major kernels can run without conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMatrix<T> {
    csr: CsrMatrix<T>,
    csc: CscMatrix<T>,
}

impl<T: Scalar> DualMatrix<T> {
    pub fn from_csr(csr: CsrMatrix<T>) -> Self {
        let csc = csr.to_csc();
        Self { csr, csc }
    }

    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        Ok(Self::from_csr(CsrMatrix::from_triplets(rows, cols, triplets)?))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_csr(CsrMatrix::identity(n))
    }

    pub fn csr(&self) -> &CsrMatrix<T> {
        &self.csr
    }

    pub fn csc(&self) -> &CscMatrix<T> {
        &self.csc
    }

    pub fn rows(&self) -> usize {
        self.csr.rows()
    }

    pub fn cols(&self) -> usize {
        self.csr.cols()
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn transpose(&self) -> Self {
        Self::from_csr(self.csr.transpose())
    }

    /// Same sparsity pattern with every value set to one.
    pub fn to_pattern(&self) -> Self {
        Self::from_csr(self.csr.with_uniform_values(T::one()))
    }

    pub fn into_csr(self) -> CsrMatrix<T> {
        self.csr
    }
}

/// Number of matrix entries in the columns listed by `x`.
pub fn effective_nnz<T: Scalar>(m: &CscMatrix<T>, x: &SparseVector<T>) -> Result<usize> {
    if x.len() != m.cols() {
        return Err(Error::DimensionMismatch { expected: m.cols(), found: x.len() });
    }
    let offsets = m.col_offsets();
    Ok(x.indices().iter().map(|&j| offsets[j + 1] - offsets[j]).sum())
}
