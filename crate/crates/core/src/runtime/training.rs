//! Kernel benchmarking and labelled-sample generation.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::features::{LazyFeatureContext, MatrixFeatureCache};
use crate::kernels::{run_kernel, KernelId, KernelOptions, VectorFormat, VectorRef, Workers};
use crate::runtime::cost::{CostInputs, CostModel};
use crate::runtime::executor::InputVector;
use crate::scalar::Scalar;
use crate::selector::TrainingSample;
use crate::sparse::{DualMatrix, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Timer {
    /// Monotonic clock, one warmup run, median of the repeats.
    Wall,
    /// Deterministic counter-based estimate; repeats are irrelevant.
    Model(CostModel),
}

impl FromStr for Timer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" => Ok(Timer::Wall),
            "model" => Ok(Timer::Model(CostModel::default())),
            other => invalid(format!("unknown timer '{other}' (expected wall or model)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub repeats: usize,
    pub workers: Workers,
    pub timer: Timer,
    pub kernel_options: KernelOptions,
}

impl BenchConfig {
    pub fn new(repeats: usize, workers: Workers) -> Self {
        BenchConfig { repeats, workers, timer: Timer::Wall, kernel_options: KernelOptions::default() }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Seconds for one run of `id`, timing the kernel alone: any format
/// conversion of `x` happens before the clock starts.
pub fn benchmark_kernel<T: Scalar>(
    m: &DualMatrix<T>,
    x: &InputVector<T>,
    id: KernelId,
    cfg: &BenchConfig,
) -> Result<f64> {
    if cfg.repeats == 0 {
        return invalid("repeats must be at least 1");
    }
    let converted;
    let input = if x.format() == id.vector_format() {
        x.as_ref()
    } else {
        converted = match (x, id.vector_format()) {
            (InputVector::Sparse(s), VectorFormat::Dense) => InputVector::Dense(s.to_dense()),
            (InputVector::Dense(d), _) => InputVector::Sparse(d.to_sparse()),
            (InputVector::Sparse(_), VectorFormat::Sparse) => unreachable!("formats already match"),
        };
        converted.as_ref()
    };
    match cfg.timer {
        Timer::Wall => {
            run_kernel(id, m, input, &cfg.workers, cfg.kernel_options)?;
            let mut samples = Vec::with_capacity(cfg.repeats);
            for _ in 0..cfg.repeats {
                let t = Instant::now();
                let out = run_kernel(id, m, input, &cfg.workers, cfg.kernel_options)?;
                samples.push(t.elapsed().as_secs_f64());
                drop(out);
            }
            Ok(median(samples))
        }
        Timer::Model(model) => {
            let out = run_kernel(id, m, input, &cfg.workers, cfg.kernel_options)?;
            let nnz_x = match input {
                VectorRef::Sparse(s) => s.nnz(),
                VectorRef::Dense(d) => d.count_nonzeros(),
            };
            let inputs = CostInputs {
                rows: m.rows(),
                cols: m.cols(),
                nnz: m.nnz(),
                nnz_x,
                output_nnz: out.dense.count_nonzeros(),
                workers: cfg.workers.count(),
            };
            Ok(model.seconds(id, &out.counters, inputs))
        }
    }
}

/// Timings of all eight kernels on one input.
pub fn time_all_kernels<T: Scalar>(m: &DualMatrix<T>, x: &InputVector<T>, cfg: &BenchConfig) -> Result<[f64; 8]> {
    let mut t = [0.0; 8];
    for k in KernelId::ALL {
        t[k.index()] = benchmark_kernel(m, x, k, cfg)?;
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepKind {
    Uniform,
    Geometric,
}

/// Vector-density points: `uniform:k`, `geometric:k`, or a comma-joined mix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensitySweep {
    parts: Vec<(SweepKind, usize)>,
}

impl FromStr for DensitySweep {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for piece in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (kind, k) = piece
                .split_once(':')
                .ok_or_else(|| Error::InvalidInput(format!("density spec '{piece}' is not kind:count")))?;
            let kind = match kind {
                "uniform" => SweepKind::Uniform,
                "geometric" => SweepKind::Geometric,
                other => return invalid(format!("unknown density sweep '{other}'")),
            };
            let k: usize = k.parse().map_err(|_| Error::InvalidInput(format!("bad point count in '{piece}'")))?;
            if k < 2 {
                return invalid(format!("density sweep '{piece}' needs at least 2 points"));
            }
            parts.push((kind, k));
        }
        if parts.is_empty() {
            return invalid("empty density spec");
        }
        Ok(DensitySweep { parts })
    }
}

impl DensitySweep {
    /// Distinct nonzero counts in `[1, n]`, ascending.
    pub fn points(&self, n: usize) -> Vec<usize> {
        if n == 0 {
            return Vec::new();
        }
        let mut pts = Vec::new();
        for &(kind, k) in &self.parts {
            for i in 0..k {
                let v = match kind {
                    SweepKind::Uniform => 1.0 + i as f64 * (n - 1) as f64 / (k - 1) as f64,
                    SweepKind::Geometric => (n as f64).powf(i as f64 / (k - 1) as f64),
                };
                pts.push((v.round() as usize).clamp(1, n));
            }
        }
        pts.sort_unstable();
        pts.dedup();
        pts
    }
}

/// `nnz` distinct random indices with values uniform in `[-1, 1]` (never 0).
pub fn random_sparse_vector<T: Scalar, R: Rng>(n: usize, nnz: usize, rng: &mut R) -> Result<SparseVector<T>> {
    if nnz > n {
        return invalid(format!("cannot place {nnz} nonzeros in a length-{n} vector"));
    }
    let mut idx = rand::seq::index::sample(rng, n, nnz).into_vec();
    idx.sort_unstable();
    let values = idx
        .iter()
        .map(|_| loop {
            let v: f64 = rng.gen_range(-1.0..=1.0);
            if v != 0.0 {
                break T::from_f64_lossy(v);
            }
        })
        .collect();
    SparseVector::new(n, idx, values)
}

#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub densities: DensitySweep,
    pub bench: BenchConfig,
    pub seed: u64,
}

/// Times every kernel on random vectors along the density sweep of each
/// matrix. A sample whose kernels fail is logged and skipped.
pub fn generate_training_data<T: Scalar>(
    corpus: &[(String, DualMatrix<T>)],
    cfg: &TrainingConfig,
) -> Result<Vec<TrainingSample>> {
    if corpus.is_empty() {
        return invalid("training corpus is empty");
    }
    let mut samples = Vec::new();
    for (mi, (name, m)) in corpus.iter().enumerate() {
        let cache = match MatrixFeatureCache::new(m) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("skipping matrix {name}: {e}");
                continue;
            }
        };
        for (pi, nnz) in cfg.densities.points(m.cols()).into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((mi as u64) << 32) | pi as u64);
            let x: SparseVector<T> = random_sparse_vector(m.cols(), nnz, &mut rng)?;
            let features = LazyFeatureContext::new(m, &cache, VectorRef::Sparse(&x))?.full_vector();
            let input = InputVector::Sparse(x);
            match time_all_kernels(m, &input, &cfg.bench)
                .and_then(|t| TrainingSample::new(name.clone(), nnz, features, t))
            {
                Ok(s) => samples.push(s),
                Err(e) => log::warn!("dropping sample {name} nnz_x={nnz}: {e}"),
            }
        }
    }
    Ok(samples)
}
