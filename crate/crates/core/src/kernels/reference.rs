use crate::error::Result;
use crate::kernels::check_dim;
use crate::scalar::Scalar;
use crate::sparse::{DenseVector, DualMatrix};

/// Sequential ground truth: `y_i = sum_j A_ij * x_j`, row by row.
pub fn reference_multiply<T: Scalar>(m: &DualMatrix<T>, x: &DenseVector<T>) -> Result<DenseVector<T>> {
    check_dim(m.cols(), x.len())?;
    let csr = m.csr();
    let mut y = vec![T::zero(); m.rows()];
    for (r, out) in y.iter_mut().enumerate() {
        let (cols, vals) = csr.row(r);
        let mut acc = T::zero();
        for (&c, &v) in cols.iter().zip(vals) {
            acc += v * x.values[c];
        }
        *out = acc;
    }
    Ok(DenseVector::new(y))
}
