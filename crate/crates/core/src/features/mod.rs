//! The thirteen selector features.
//!
//! Matrix features (ids 0-8) are cached once per matrix; vector features
//! (ids 9-12) are recomputed for every input vector. All of them are pulled
//! lazily through [`LazyFeatureContext`], so a tree that routes on `n` alone
//! never pays for the Gini coefficient.
//!
//! | id | name | meaning |
//! |----|------|---------|
//! | 0 | `m` | rows |
//! | 1 | `n` | columns |
//! | 2 | `nnz` | stored entries |
//! | 3 | `max_row` | largest row degree |
//! | 4 | `min_row` | smallest row degree |
//! | 5 | `avg_row` | `nnz / m` |
//! | 6 | `relative_range` | `(max_row - min_row) / n` |
//! | 7 | `var_nnz_row` | population standard deviation of row degrees |
//! | 8 | `gc` | Gini coefficient of row degrees |
//! | 9 | `nnz_x` | nonzeros of the vector |
//! | 10 | `x_sparsity` | `nnz_x / n` |
//! | 11 | `nnz_s` | effective nonzeros (entries in listed columns) |
//! | 12 | `m_sparsity` | `nnz_s / nnz` |
//!
//! The order is frozen: model files refer to features by id.

mod gini;
mod lazy;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::sparse::DualMatrix;

pub use gini::gini_coefficient;
pub use lazy::{compute_vector_features, get_feature, FeatureCounters, LazyFeatureContext, MatrixFeatureCache};

pub const FEATURE_COUNT: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Rows = 0,
    Cols = 1,
    Nnz = 2,
    MaxRow = 3,
    MinRow = 4,
    AvgRow = 5,
    RelativeRange = 6,
    VarNnzRow = 7,
    Gini = 8,
    NnzX = 9,
    XSparsity = 10,
    NnzS = 11,
    MSparsity = 12,
}

/// Relative evaluation cost, used by cost-aware training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeatureCost {
    Cheap = 0,
    Medium = 1,
    Expensive = 2,
}

impl Feature {
    pub const ALL: [Feature; FEATURE_COUNT] = [
        Feature::Rows,
        Feature::Cols,
        Feature::Nnz,
        Feature::MaxRow,
        Feature::MinRow,
        Feature::AvgRow,
        Feature::RelativeRange,
        Feature::VarNnzRow,
        Feature::Gini,
        Feature::NnzX,
        Feature::XSparsity,
        Feature::NnzS,
        Feature::MSparsity,
    ];

    pub const NAMES: [&'static str; FEATURE_COUNT] = [
        "m",
        "n",
        "nnz",
        "max_row",
        "min_row",
        "avg_row",
        "relative_range",
        "var_nnz_row",
        "gc",
        "nnz_x",
        "x_sparsity",
        "nnz_s",
        "m_sparsity",
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        Self::NAMES[self.index()]
    }

    pub fn is_matrix_feature(self) -> bool {
        self.index() <= Feature::Gini.index()
    }

    pub fn cost(self) -> FeatureCost {
        use Feature::*;
        match self {
            Rows | Cols | Nnz | NnzX | XSparsity => FeatureCost::Cheap,
            NnzS | MSparsity => FeatureCost::Medium,
            MaxRow | MinRow | AvgRow | RelativeRange | VarNnzRow | Gini => FeatureCost::Expensive,
        }
    }
}

/// Set of feature ids a model may split on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMask(u16);

impl FeatureMask {
    pub const ALL: FeatureMask = FeatureMask((1 << FEATURE_COUNT) - 1);
    /// Pattern model: every feature.
    pub const PATTERN: FeatureMask = FeatureMask::ALL;
    /// Workload model: the matrix features, ids 0-8.
    pub const WORKLOAD: FeatureMask = FeatureMask((1 << 9) - 1);
    /// Write-back model: dimensions plus the vector features.
    pub const WRITEBACK: FeatureMask = FeatureMask(0b111 | (0b1111 << 9));

    pub fn from_features(features: &[Feature]) -> Self {
        FeatureMask(features.iter().fold(0, |acc, f| acc | 1 << f.index()))
    }

    pub fn from_bits(bits: u16) -> Result<Self> {
        if bits & !Self::ALL.0 != 0 {
            return invalid(format!("feature mask {bits:#x} names unknown features"));
        }
        Ok(FeatureMask(bits))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, f: Feature) -> bool {
        self.0 & (1 << f.index()) != 0
    }

    pub fn features(self) -> impl Iterator<Item = Feature> {
        Feature::ALL.into_iter().filter(move |f| self.contains(*f))
    }
}

/// Matrix-only statistics over row degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixFeatures {
    pub m: usize,
    pub n: usize,
    pub nnz: usize,
    pub max_row: usize,
    pub min_row: usize,
    pub avg_row: f64,
    pub relative_range: f64,
    pub var_nnz_row: f64,
    pub gc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorFeatures {
    pub nnz_x: usize,
    pub x_sparsity: f64,
    pub nnz_s: usize,
    pub m_sparsity: f64,
}

/// All thirteen values in frozen id order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn from_parts(m: &MatrixFeatures, v: &VectorFeatures) -> Self {
        FeatureVector([
            m.m as f64,
            m.n as f64,
            m.nnz as f64,
            m.max_row as f64,
            m.min_row as f64,
            m.avg_row,
            m.relative_range,
            m.var_nnz_row,
            m.gc,
            v.nnz_x as f64,
            v.x_sparsity,
            v.nnz_s as f64,
            v.m_sparsity,
        ])
    }

    pub fn get(&self, f: Feature) -> f64 {
        self.0[f.index()]
    }
}

impl std::ops::Index<Feature> for FeatureVector {
    type Output = f64;

    fn index(&self, f: Feature) -> &f64 {
        &self.0[f.index()]
    }
}

/// Row-degree statistics shared by ids 3-7.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RowStats {
    pub max_row: usize,
    pub min_row: usize,
    pub avg_row: f64,
    pub std_row: f64,
}

pub(crate) fn row_stats<T: Scalar>(m: &DualMatrix<T>) -> Result<RowStats> {
    if m.rows() == 0 {
        return invalid("row statistics of a matrix without rows");
    }
    let (mut max_row, mut min_row, mut sum) = (0usize, usize::MAX, 0usize);
    for d in m.csr().row_degrees() {
        max_row = max_row.max(d);
        min_row = min_row.min(d);
        sum += d;
    }
    let rows = m.rows() as f64;
    let avg_row = sum as f64 / rows;
    let var = m.csr().row_degrees().map(|d| (d as f64 - avg_row).powi(2)).sum::<f64>() / rows;
    Ok(RowStats { max_row, min_row, avg_row, std_row: var.sqrt() })
}

pub(crate) fn row_gini<T: Scalar>(m: &DualMatrix<T>) -> Result<f64> {
    let degrees: Vec<usize> = m.csr().row_degrees().collect();
    gini_coefficient(&degrees)
}

/// Eager computation of ids 0-8.
pub fn compute_matrix_features<T: Scalar>(m: &DualMatrix<T>) -> Result<MatrixFeatures> {
    if m.rows() == 0 || m.cols() == 0 {
        return invalid("matrix features need at least one row and one column");
    }
    let stats = row_stats(m)?;
    Ok(MatrixFeatures {
        m: m.rows(),
        n: m.cols(),
        nnz: m.nnz(),
        max_row: stats.max_row,
        min_row: stats.min_row,
        avg_row: stats.avg_row,
        relative_range: (stats.max_row - stats.min_row) as f64 / m.cols() as f64,
        var_nnz_row: stats.std_row,
        gc: row_gini(m)?,
    })
}
