//! Row- and column-compressed matrix layouts.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row; explicit zeros are kept and count toward `nnz`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
}

/// Compressed sparse column matrix, the mirror of [`CsrMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix<T> {
    rows: usize,
    cols: usize,
    col_offsets: Vec<usize>,
    row_indices: Vec<usize>,
    values: Vec<T>,
}

fn validate_compressed(major: usize, minor: usize, offsets: &[usize], indices: &[usize], nvalues: usize) -> Result<()> {
    if offsets.len() != major + 1 {
        return invalid(format!("offset array has length {}, expected {}", offsets.len(), major + 1));
    }
    if offsets[0] != 0 {
        return invalid("offsets must start at 0");
    }
    if offsets[major] != indices.len() || indices.len() != nvalues {
        return invalid(format!(
            "offsets end at {} but there are {} indices and {} values",
            offsets[major],
            indices.len(),
            nvalues
        ));
    }
    for (k, w) in offsets.windows(2).enumerate() {
        if w[0] > w[1] {
            return invalid(format!("offsets decrease at {k}"));
        }
        let lane = &indices[w[0]..w[1]];
        for pair in lane.windows(2) {
            if pair[0] >= pair[1] {
                return invalid(format!("indices of lane {k} are not strictly increasing"));
            }
        }
        if let Some(&last) = lane.last() {
            if last >= minor {
                return Err(Error::OutOfBounds { index: last, len: minor });
            }
        }
    }
    Ok(())
}

/// Re-compresses along the other axis with a counting sort. Output lanes come
/// out sorted because input lanes are visited in order.
fn transpose_compressed<T: Copy>(
    major: usize,
    minor: usize,
    offsets: &[usize],
    indices: &[usize],
    values: &[T],
) -> (Vec<usize>, Vec<usize>, Vec<T>) {
    let nnz = indices.len();
    let mut out_offsets = vec![0usize; minor + 1];
    for &i in indices {
        out_offsets[i + 1] += 1;
    }
    for k in 0..minor {
        out_offsets[k + 1] += out_offsets[k];
    }
    let mut cursor = out_offsets.clone();
    let mut out_indices = vec![0usize; nnz];
    let mut out_values = Vec::with_capacity(nnz);
    let mut slots = vec![0usize; nnz];
    for lane in 0..major {
        for p in offsets[lane]..offsets[lane + 1] {
            let dst = cursor[indices[p]];
            cursor[indices[p]] += 1;
            out_indices[dst] = lane;
            slots[dst] = p;
        }
    }
    out_values.extend(slots.iter().map(|&p| values[p]));
    (out_offsets, out_indices, out_values)
}

/// Sorts `(major, minor, value)` triplets and sums duplicates.
fn compress_triplets<T: Scalar>(
    major: usize,
    minor: usize,
    mut entries: Vec<(usize, usize, T)>,
) -> Result<(Vec<usize>, Vec<usize>, Vec<T>)> {
    for &(a, b, _) in &entries {
        if a >= major {
            return Err(Error::OutOfBounds { index: a, len: major });
        }
        if b >= minor {
            return Err(Error::OutOfBounds { index: b, len: minor });
        }
    }
    entries.sort_by_key(|&(a, b, _)| (a, b));
    let mut offsets = vec![0usize; major + 1];
    let mut indices: Vec<usize> = Vec::with_capacity(entries.len());
    let mut values: Vec<T> = Vec::with_capacity(entries.len());
    let mut last: Option<(usize, usize)> = None;
    for (a, b, v) in entries {
        if last == Some((a, b)) {
            *values.last_mut().expect("duplicate follows an entry") += v;
            continue;
        }
        last = Some((a, b));
        offsets[a + 1] += 1;
        indices.push(b);
        values.push(v);
    }
    for k in 0..major {
        offsets[k + 1] += offsets[k];
    }
    Ok((offsets, indices, values))
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        validate_compressed(rows, cols, &row_offsets, &col_indices, values.len())?;
        Ok(Self { rows, cols, row_offsets, col_indices, values })
    }

    /// Builds a matrix from 0-based `(row, col, value)` triplets in any order.
    /// Duplicate coordinates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let (row_offsets, col_indices, values) = compress_triplets(rows, cols, triplets.to_vec())?;
        Ok(Self { rows, cols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_offsets: vec![0; rows + 1], col_indices: Vec::new(), values: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    #[inline]
    pub fn row_degree(&self, r: usize) -> usize {
        self.row_offsets[r + 1] - self.row_offsets[r]
    }

    pub fn row_degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.row_offsets.windows(2).map(|w| w[1] - w[0])
    }

    /// Triplets in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            out.extend(cols.iter().zip(vals).map(|(&c, &v)| (r, c, v)));
        }
        out
    }

    pub fn to_csc(&self) -> CscMatrix<T> {
        let (col_offsets, row_indices, values) =
            transpose_compressed(self.rows, self.cols, &self.row_offsets, &self.col_indices, &self.values);
        CscMatrix { rows: self.rows, cols: self.cols, col_offsets, row_indices, values }
    }

    /// The transposed matrix, again in CSR.
    pub fn transpose(&self) -> CsrMatrix<T> {
        let (row_offsets, col_indices, values) =
            transpose_compressed(self.rows, self.cols, &self.row_offsets, &self.col_indices, &self.values);
        CsrMatrix { rows: self.cols, cols: self.rows, row_offsets, col_indices, values }
    }

    /// Same structure with every stored value replaced by `v`.
    pub fn with_uniform_values(&self, v: T) -> CsrMatrix<T> {
        CsrMatrix { values: vec![v; self.nnz()], ..self.clone() }
    }

    pub(crate) fn map_values(&self, f: impl Fn(usize, usize, T) -> T) -> CsrMatrix<T> {
        let mut values = self.values.clone();
        for r in 0..self.rows {
            for p in self.row_offsets[r]..self.row_offsets[r + 1] {
                values[p] = f(r, self.col_indices[p], self.values[p]);
            }
        }
        CsrMatrix { values, ..self.clone() }
    }
}

impl<T: Scalar> CscMatrix<T> {
    pub fn new(
        rows: usize,
        cols: usize,
        col_offsets: Vec<usize>,
        row_indices: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        validate_compressed(cols, rows, &col_offsets, &row_indices, values.len())?;
        Ok(Self { rows, cols, col_offsets, row_indices, values })
    }

    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let swapped = triplets.iter().map(|&(r, c, v)| (c, r, v)).collect();
        let (col_offsets, row_indices, values) = compress_triplets(cols, rows, swapped)?;
        Ok(Self { rows, cols, col_offsets, row_indices, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.row_indices.len()
    }

    pub fn col_offsets(&self) -> &[usize] {
        &self.col_offsets
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn col(&self, c: usize) -> (&[usize], &[T]) {
        let span = self.col_offsets[c]..self.col_offsets[c + 1];
        (&self.row_indices[span.clone()], &self.values[span])
    }

    #[inline]
    pub fn col_degree(&self, c: usize) -> usize {
        self.col_offsets[c + 1] - self.col_offsets[c]
    }

    /// Triplets in row-major order, for comparison with [`CsrMatrix::triplets`].
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::with_capacity(self.nnz());
        for c in 0..self.cols {
            let (rows, vals) = self.col(c);
            out.extend(rows.iter().zip(vals).map(|(&r, &v)| (r, c, v)));
        }
        out.sort_by_key(|&(r, c, _)| (r, c));
        out
    }

    pub fn to_csr(&self) -> CsrMatrix<T> {
        let (row_offsets, col_indices, values) =
            transpose_compressed(self.cols, self.rows, &self.col_offsets, &self.row_indices, &self.values);
        CsrMatrix { rows: self.rows, cols: self.cols, row_offsets, col_indices, values }
    }
}

pub fn csr_to_csc<T: Scalar>(m: &CsrMatrix<T>) -> CscMatrix<T> {
    m.to_csc()
}

pub fn csc_to_csr<T: Scalar>(m: &CscMatrix<T>) -> CsrMatrix<T> {
    m.to_csr()
}
