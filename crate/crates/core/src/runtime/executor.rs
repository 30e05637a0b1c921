//! Per-iteration adaptive multiplication.

use std::sync::Arc;
use std::time::Instant;

use crate::error::{invalid, Result};
use crate::features::{Feature, LazyFeatureContext, MatrixFeatureCache, FEATURE_COUNT};
use crate::kernels::{
    check_dim, run_kernel, KernelId, KernelOptions, MultiplyOutput, VectorFormat, VectorRef, Workers,
};
use crate::scalar::Scalar;
use crate::selector::SelectorBundle;
use crate::sparse::{DenseVector, DualMatrix, SparseVector};

/// An owned input vector in whichever representation the caller has.
#[derive(Debug, Clone, PartialEq)]
pub enum InputVector<T> {
    Dense(DenseVector<T>),
    Sparse(SparseVector<T>),
}

impl<T: Scalar> InputVector<T> {
    pub fn len(&self) -> usize {
        match self {
            InputVector::Dense(d) => d.len(),
            InputVector::Sparse(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn format(&self) -> VectorFormat {
        match self {
            InputVector::Dense(_) => VectorFormat::Dense,
            InputVector::Sparse(_) => VectorFormat::Sparse,
        }
    }

    pub fn as_ref(&self) -> VectorRef<'_, T> {
        match self {
            InputVector::Dense(d) => VectorRef::Dense(d),
            InputVector::Sparse(s) => VectorRef::Sparse(s),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            InputVector::Dense(d) => d.count_nonzeros(),
            InputVector::Sparse(s) => s.nnz(),
        }
    }

    pub fn to_dense(&self) -> DenseVector<T> {
        match self {
            InputVector::Dense(d) => d.clone(),
            InputVector::Sparse(s) => s.to_dense(),
        }
    }
}

impl<T> From<DenseVector<T>> for InputVector<T> {
    fn from(v: DenseVector<T>) -> Self {
        InputVector::Dense(v)
    }
}

impl<T> From<SparseVector<T>> for InputVector<T> {
    fn from(v: SparseVector<T>) -> Self {
        InputVector::Sparse(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExecutorConfig {
    pub workers: Option<Workers>,
    /// Skip prediction and always run this kernel.
    pub force_kernel: Option<KernelId>,
    pub kernel_options: KernelOptions,
}

/// Timing breakdown of one adaptive multiplication, in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub kernel: KernelId,
    pub nnz_x: usize,
    pub feature_s: f64,
    /// Tree evaluation, excluding the feature work it triggered.
    pub predict_s: f64,
    pub convert_s: f64,
    pub kernel_s: f64,
    /// Wall time of the whole call.
    pub wall_s: f64,
    pub converted: bool,
    /// Features materialized for this iteration; untouched ones are `None`.
    pub features: [Option<f64>; FEATURE_COUNT],
}

impl IterationReport {
    pub fn overhead_s(&self) -> f64 {
        self.feature_s + self.predict_s + self.convert_s
    }

    pub fn total_s(&self) -> f64 {
        self.overhead_s() + self.kernel_s
    }
}

#[derive(Debug, Clone)]
pub struct Iteration<T> {
    pub output: MultiplyOutput<T>,
    pub report: IterationReport,
}

/// Runs one multiplication stream over a fixed matrix, choosing a kernel
/// for every input vector.
pub struct AdaptiveExecutor<T> {
    matrix: Arc<DualMatrix<T>>,
    cache: Arc<MatrixFeatureCache>,
    bundle: Option<Arc<SelectorBundle>>,
    workers: Workers,
    force_kernel: Option<KernelId>,
    kernel_options: KernelOptions,
    previous: Option<KernelId>,
    format: VectorFormat,
    conversions: usize,
    iterations: usize,
}

impl<T: Scalar> AdaptiveExecutor<T> {
    pub fn new(
        matrix: Arc<DualMatrix<T>>,
        bundle: Option<Arc<SelectorBundle>>,
        config: ExecutorConfig,
    ) -> Result<Self> {
        let cache = Arc::new(MatrixFeatureCache::new(&matrix)?);
        Self::with_cache(matrix, cache, bundle, config)
    }

    /// Shares a feature cache with other executors on the same matrix.
    pub fn with_cache(
        matrix: Arc<DualMatrix<T>>,
        cache: Arc<MatrixFeatureCache>,
        bundle: Option<Arc<SelectorBundle>>,
        config: ExecutorConfig,
    ) -> Result<Self> {
        if bundle.is_none() && config.force_kernel.is_none() {
            return invalid("executor needs a trained selector or a forced kernel");
        }
        let workers = match config.workers {
            Some(w) => w,
            None => Workers::from_env()?,
        };
        Ok(AdaptiveExecutor {
            matrix,
            cache,
            bundle,
            workers,
            force_kernel: config.force_kernel,
            kernel_options: config.kernel_options,
            previous: None,
            format: VectorFormat::Sparse,
            conversions: 0,
            iterations: 0,
        })
    }

    pub fn matrix(&self) -> &DualMatrix<T> {
        &self.matrix
    }

    pub fn cache(&self) -> &MatrixFeatureCache {
        &self.cache
    }

    pub fn workers(&self) -> &Workers {
        &self.workers
    }

    /// Format the last kernel consumed; supplying the next vector in it
    /// avoids a conversion when the choice does not change.
    pub fn preferred_format(&self) -> VectorFormat {
        self.format
    }

    pub fn previous_kernel(&self) -> Option<KernelId> {
        self.previous
    }

    pub fn conversions(&self) -> usize {
        self.conversions
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn execute_iteration(&mut self, x: impl Into<InputVector<T>>) -> Result<Iteration<T>> {
        let x = x.into();
        check_dim(self.matrix.cols(), x.len())?;
        let start = Instant::now();

        let (kernel, feature_s, predict_s, features) = match (self.force_kernel, &self.bundle) {
            (Some(k), _) => (k, 0.0, 0.0, [None; FEATURE_COUNT]),
            (None, Some(bundle)) => {
                let t = Instant::now();
                let mut ctx =
                    LazyFeatureContext::new(&self.matrix, &self.cache, x.as_ref())?.with_workers(&self.workers);
                let k = bundle.predict_kernel(&mut ctx);
                let total = t.elapsed().as_secs_f64();
                let feature = ctx.elapsed().as_secs_f64().min(total);
                (k, feature, total - feature, ctx.snapshot())
            }
            (None, None) => return invalid("no selector available"),
        };

        let t = Instant::now();
        let want = kernel.vector_format();
        let converted_vec;
        let input = if x.format() == want {
            x.as_ref()
        } else {
            converted_vec = match &x {
                InputVector::Dense(d) => InputVector::Sparse(d.to_sparse()),
                InputVector::Sparse(s) => InputVector::Dense(s.to_dense()),
            };
            self.conversions += 1;
            converted_vec.as_ref()
        };
        let converted = x.format() != want;
        let convert_s = if converted { t.elapsed().as_secs_f64() } else { 0.0 };

        let t = Instant::now();
        let output = run_kernel(kernel, &self.matrix, input, &self.workers, self.kernel_options)?;
        let kernel_s = t.elapsed().as_secs_f64();
        let wall_s = start.elapsed().as_secs_f64();

        self.previous = Some(kernel);
        self.format = want;
        self.iterations += 1;
        let nnz_x = features[Feature::NnzX.index()].map_or_else(|| x.nnz(), |v| v as usize);
        Ok(Iteration {
            output,
            report: IterationReport {
                kernel,
                nnz_x,
                feature_s,
                predict_s,
                convert_s,
                kernel_s,
                wall_s,
                converted,
                features,
            },
        })
    }
}
