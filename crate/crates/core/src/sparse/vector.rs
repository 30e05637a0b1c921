use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Dense vector: every element stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector<T> {
    pub values: Vec<T>,
}

/// Sparse vector: strictly increasing indices and their values. Listed
/// indices are structural nonzeros even when the stored value is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector<T> {
    len: usize,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> DenseVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![T::zero(); n] }
    }

    pub fn filled(n: usize, v: T) -> Self {
        Self { values: vec![v; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn count_nonzeros(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }

    pub fn to_sparse(&self) -> SparseVector<T> {
        dense_to_sparse(self)
    }
}

impl<T: Scalar> SparseVector<T> {
    pub fn new(len: usize, indices: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if indices.len() != values.len() {
            return invalid(format!("{} indices but {} values", indices.len(), values.len()));
        }
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return invalid("sparse vector indices must be strictly increasing");
            }
        }
        if let Some(&last) = indices.last() {
            if last >= len {
                return Err(Error::OutOfBounds { index: last, len });
            }
        }
        Ok(Self { len, indices, values })
    }

    /// Trusted constructor for kernels and generators that build sorted,
    /// in-range indices themselves.
    pub(crate) fn from_sorted_unchecked(len: usize, indices: Vec<usize>, values: Vec<T>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.last().map_or(true, |&i| i < len));
        Self { len, indices, values }
    }

    pub fn empty(len: usize) -> Self {
        Self { len, indices: Vec::new(), values: Vec::new() }
    }

    /// The unit vector `e_i`.
    pub fn unit(len: usize, i: usize) -> Result<Self> {
        Self::new(len, vec![i], vec![T::one()])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> DenseVector<T> {
        sparse_to_dense(self)
    }
}

/// Drops exact zeros.
pub fn dense_to_sparse<T: Scalar>(v: &DenseVector<T>) -> SparseVector<T> {
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for (i, &x) in v.values.iter().enumerate() {
        if !x.is_zero() {
            indices.push(i);
            values.push(x);
        }
    }
    SparseVector { len: v.len(), indices, values }
}

pub fn sparse_to_dense<T: Scalar>(v: &SparseVector<T>) -> DenseVector<T> {
    let mut out = vec![T::zero(); v.len];
    for (i, x) in v.iter() {
        out[i] = x;
    }
    DenseVector { values: out }
}
