use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use crate::error::{invalid, Error, Result};
use crate::features::{row_gini, row_stats, Feature, FeatureVector, RowStats, VectorFeatures, FEATURE_COUNT};
use crate::kernels::{VectorRef, Workers};
use crate::scalar::Scalar;
use crate::sparse::{effective_nnz, DualMatrix};

/// Below this length vector scans stay on the calling thread.
pub const PARALLEL_SCAN_THRESHOLD: usize = 4096;

/// Per-matrix memo for the expensive row statistics and the Gini
/// coefficient. Each is computed at most once, on first use.
#[derive(Debug, Default)]
pub struct MatrixFeatureCache {
    stats: OnceLock<RowStats>,
    gini: OnceLock<f64>,
    row_stat_scans: AtomicUsize,
    gini_scans: AtomicUsize,
}

impl MatrixFeatureCache {
    /// Degenerate matrices have no defined row statistics and are rejected.
    pub fn new<T: Scalar>(m: &DualMatrix<T>) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return invalid("feature cache needs at least one row and one column");
        }
        Ok(Self::default())
    }

    pub(crate) fn stats<T: Scalar>(&self, m: &DualMatrix<T>) -> RowStats {
        *self.stats.get_or_init(|| {
            self.row_stat_scans.fetch_add(1, Ordering::Relaxed);
            row_stats(m).expect("cache is only built for matrices with rows")
        })
    }

    pub(crate) fn gini<T: Scalar>(&self, m: &DualMatrix<T>) -> f64 {
        *self.gini.get_or_init(|| {
            self.gini_scans.fetch_add(1, Ordering::Relaxed);
            row_gini(m).expect("cache is only built for matrices with rows")
        })
    }

    /// Number of row-degree passes made for ids 3-7.
    pub fn row_stat_scans(&self) -> usize {
        self.row_stat_scans.load(Ordering::Relaxed)
    }

    /// Number of degree sorts made for the Gini coefficient.
    pub fn gini_scans(&self) -> usize {
        self.gini_scans.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureCounters {
    /// Times each feature was materialized in this context (0 or 1).
    pub computed: [u32; FEATURE_COUNT],
    /// Passes over a dense vector to count its nonzeros.
    pub nnz_x_scans: u32,
    /// Passes to sum column degrees over the vector's support.
    pub nnz_s_scans: u32,
    /// Trees consulted by the cascade: pattern, workload, write-back.
    pub trees_evaluated: [u32; 3],
}

/// Feature access for one multiplication. Every feature is computed on first
/// request and memoized; matrix features go through the shared cache.
pub struct LazyFeatureContext<'a, T> {
    matrix: &'a DualMatrix<T>,
    cache: &'a MatrixFeatureCache,
    vector: VectorRef<'a, T>,
    workers: Option<&'a Workers>,
    slots: [Option<f64>; FEATURE_COUNT],
    nnz_x: Option<usize>,
    nnz_s: Option<usize>,
    counters: FeatureCounters,
    elapsed: Duration,
}

impl<'a, T: Scalar> LazyFeatureContext<'a, T> {
    pub fn new(matrix: &'a DualMatrix<T>, cache: &'a MatrixFeatureCache, vector: VectorRef<'a, T>) -> Result<Self> {
        if vector.len() != matrix.cols() {
            return Err(Error::DimensionMismatch { expected: matrix.cols(), found: vector.len() });
        }
        Ok(Self {
            matrix,
            cache,
            vector,
            workers: None,
            slots: [None; FEATURE_COUNT],
            nnz_x: None,
            nnz_s: None,
            counters: FeatureCounters::default(),
            elapsed: Duration::ZERO,
        })
    }

    /// Lets long dense-vector scans fan out over `workers`.
    pub fn with_workers(mut self, workers: &'a Workers) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn get(&mut self, f: Feature) -> f64 {
        if let Some(v) = self.slots[f.index()] {
            return v;
        }
        let start = Instant::now();
        let v = self.compute(f);
        self.elapsed += start.elapsed();
        v
    }

    fn compute(&mut self, f: Feature) -> f64 {
        let m = self.matrix;
        let v = match f {
            Feature::Rows => m.rows() as f64,
            Feature::Cols => m.cols() as f64,
            Feature::Nnz => m.nnz() as f64,
            Feature::MaxRow => self.cache.stats(m).max_row as f64,
            Feature::MinRow => self.cache.stats(m).min_row as f64,
            Feature::AvgRow => self.cache.stats(m).avg_row,
            Feature::RelativeRange => {
                let s = self.cache.stats(m);
                (s.max_row - s.min_row) as f64 / m.cols() as f64
            }
            Feature::VarNnzRow => self.cache.stats(m).std_row,
            Feature::Gini => self.cache.gini(m),
            Feature::NnzX => self.nnz_x() as f64,
            Feature::XSparsity => self.nnz_x() as f64 / m.cols() as f64,
            Feature::NnzS => self.nnz_s() as f64,
            Feature::MSparsity => {
                if m.nnz() == 0 {
                    0.0
                } else {
                    self.nnz_s() as f64 / m.nnz() as f64
                }
            }
        };
        self.slots[f.index()] = Some(v);
        self.counters.computed[f.index()] += 1;
        v
    }

    fn parallel_scan(&self) -> Option<&'a Workers> {
        self.workers.filter(|w| w.count() > 1 && self.vector.len() >= PARALLEL_SCAN_THRESHOLD)
    }

    fn nnz_x(&mut self) -> usize {
        if let Some(v) = self.nnz_x {
            return v;
        }
        let v = match self.vector {
            VectorRef::Sparse(s) => s.nnz(),
            VectorRef::Dense(d) => {
                self.counters.nnz_x_scans += 1;
                let values = &d.values;
                match self.parallel_scan() {
                    None => values.iter().filter(|x| !x.is_zero()).count(),
                    Some(w) => {
                        let wc = w.count();
                        let n = values.len();
                        w.map(|i| values[i * n / wc..(i + 1) * n / wc].iter().filter(|x| !x.is_zero()).count())
                            .into_iter()
                            .sum()
                    }
                }
            }
        };
        self.nnz_x = Some(v);
        v
    }

    fn nnz_s(&mut self) -> usize {
        if let Some(v) = self.nnz_s {
            return v;
        }
        self.counters.nnz_s_scans += 1;
        let csc = self.matrix.csc();
        let v = match self.vector {
            VectorRef::Sparse(s) => effective_nnz(csc, s).expect("dimension checked at construction"),
            VectorRef::Dense(d) => {
                // one pass yields both the support size and its column mass
                let offsets = csc.col_offsets();
                let values = &d.values;
                let scan = |lo: usize, hi: usize| -> (usize, usize) {
                    let mut count = 0;
                    let mut mass = 0;
                    // branch-free: frontier supports are irregular
                    for j in lo..hi {
                        let hit = usize::from(!values[j].is_zero());
                        count += hit;
                        mass += hit * (offsets[j + 1] - offsets[j]);
                    }
                    (count, mass)
                };
                let (count, mass) = match self.parallel_scan() {
                    None => scan(0, values.len()),
                    Some(w) => {
                        let wc = w.count();
                        let n = values.len();
                        w.map(|i| scan(i * n / wc, (i + 1) * n / wc))
                            .into_iter()
                            .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
                    }
                };
                self.nnz_x.get_or_insert(count);
                mass
            }
        };
        self.nnz_s = Some(v);
        v
    }

    pub(crate) fn note_tree(&mut self, tree: usize) {
        self.counters.trees_evaluated[tree] += 1;
    }

    pub fn counters(&self) -> &FeatureCounters {
        &self.counters
    }

    pub fn cache(&self) -> &MatrixFeatureCache {
        self.cache
    }

    /// Time spent computing features so far.
    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }

    /// Values materialized so far, by id.
    pub fn snapshot(&self) -> [Option<f64>; FEATURE_COUNT] {
        self.slots
    }

    /// Forces every feature (the eager path).
    pub fn full_vector(&mut self) -> FeatureVector {
        let mut out = [0.0; FEATURE_COUNT];
        for f in Feature::ALL {
            out[f.index()] = self.get(f);
        }
        FeatureVector(out)
    }
}

/// Feature by integer id.
pub fn get_feature<T: Scalar>(ctx: &mut LazyFeatureContext<'_, T>, id: usize) -> Result<f64> {
    match Feature::from_index(id) {
        Some(f) => Ok(ctx.get(f)),
        None => invalid(format!("feature id {id} is outside 0..{FEATURE_COUNT}")),
    }
}

pub fn compute_vector_features<T: Scalar>(ctx: &mut LazyFeatureContext<'_, T>) -> VectorFeatures {
    VectorFeatures {
        nnz_x: ctx.get(Feature::NnzX) as usize,
        x_sparsity: ctx.get(Feature::XSparsity),
        nnz_s: ctx.get(Feature::NnzS) as usize,
        m_sparsity: ctx.get(Feature::MSparsity),
    }
}
