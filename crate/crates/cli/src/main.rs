use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use adaspmv::apps::{bfs, generate_synthetic, pagerank_incremental, pagerank_matrix, SynthKind, SynthSpec, UNREACHED};
use adaspmv::features::{Feature, LazyFeatureContext, MatrixFeatureCache};
use adaspmv::kernels::{KernelId, Workers};
use adaspmv::runtime::{
    benchmark_kernel, generate_training_data, random_sparse_vector, summary_line, write_stats_csv, AdaptiveExecutor,
    BenchConfig, DensitySweep, ExecutorConfig, InputVector, Timer, TraceStats, TrainingConfig,
};
use adaspmv::selector::{
    chi2_rank, design, load_model, load_training_csv, save_model, save_training_csv, split_samples, train_selector,
    SearchGrid, SelectorBundle, Target, TrainOptions,
};
use adaspmv::sparse::{load_matrix, load_vector_market, save_binary, save_matrix_market, VectorFile};
use adaspmv::{Matrix, Real};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "adaspmv", version, about = "Adaptive sparse matrix-vector multiplication toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a Matrix Market file to the binary cache format.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        transpose: bool,
    },
    /// Print the 13 selector features as CSV.
    Features {
        #[arg(long)]
        matrix: PathBuf,
        /// Vector file (Matrix Market array or coordinate).
        #[arg(long, conflicts_with = "density")]
        vector: Option<PathBuf>,
        /// Fraction of nonzeros in a random vector.
        #[arg(long)]
        density: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        transpose: bool,
    },
    /// Time kernels over a density sweep.
    Bench {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "all")]
        kernels: String,
        #[arg(long, default_value = "uniform:8")]
        densities: String,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "wall")]
        timer: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        transpose: bool,
    },
    /// Time all kernels over a corpus and write labelled train/test samples.
    GenTrain {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "uniform:16,geometric:16")]
        densities: String,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value = "7:3")]
        split: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// `wall` clock or the deterministic `model` estimate.
        #[arg(long, default_value = "wall")]
        timer: String,
    },
    /// Grid-search the three selector trees.
    Train {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0.0)]
        cost_lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "")]
        hardware_tag: String,
    },
    /// Chi-squared feature ordering per selector tree.
    RankFeatures {
        #[arg(long)]
        samples: PathBuf,
    },
    /// Run an application on the adaptive executor.
    Run {
        #[arg(long, value_enum)]
        app: App,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        source: usize,
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[arg(long, default_value_t = 1e-6)]
        prune: f64,
        #[arg(long, default_value_t = 300)]
        max_iters: usize,
        #[arg(long)]
        force_kernel: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        stats: PathBuf,
        /// Levels (bfs) or ranks (pagerank), one per line.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        transpose: bool,
    },
    /// Write a synthetic matrix, or a mixed corpus with --count.
    Synth {
        #[arg(long, default_value = "power-law")]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        nnz: usize,
        #[arg(long, default_value_t = 2.0)]
        exponent: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file, or directory when --count is given.
        #[arg(long)]
        output: PathBuf,
        /// Number of matrices; kinds alternate and sizes vary around n.
        #[arg(long)]
        count: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum App {
    Bfs,
    Pagerank,
}

fn workers(threads: Option<usize>) -> Result<Workers> {
    Ok(match threads {
        Some(t) => Workers::new(t)?,
        None => Workers::from_env()?,
    })
}

fn read_matrix(path: &Path, transpose: bool) -> Result<Matrix> {
    let m: Matrix = load_matrix(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(if transpose { m.transpose() } else { m })
}

fn parse_kernels(spec: &str) -> Result<Vec<KernelId>> {
    if spec == "all" {
        return Ok(KernelId::ALL.to_vec());
    }
    spec.split(',').map(|s| s.trim().parse::<KernelId>().map_err(|e| anyhow!("{e}"))).collect()
}

fn parse_split(spec: &str) -> Result<f64> {
    let (a, b) = spec.split_once(':').ok_or_else(|| anyhow!("split '{spec}' is not train:test"))?;
    let (a, b): (f64, f64) = (a.parse()?, b.parse()?);
    if a < 0.0 || b < 0.0 || a + b <= 0.0 {
        bail!("split '{spec}' needs nonnegative parts with a positive sum");
    }
    Ok(a / (a + b))
}

fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(std::io::BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Matrix files of a corpus directory, sorted by file name.
fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading corpus {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("mtx" | "bin")))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .mtx or .bin matrices in {}", dir.display());
    }
    Ok(files)
}

/// A samples argument may be a directory holding train.csv/test.csv or a CSV.
fn sample_files(path: &Path) -> (PathBuf, Option<PathBuf>) {
    if path.is_dir() {
        let test = path.join("test.csv");
        (path.join("train.csv"), test.exists().then_some(test))
    } else {
        (path.to_path_buf(), None)
    }
}

fn convert(input: &Path, output: &Path, transpose: bool) -> Result<()> {
    let m = read_matrix(input, transpose)?;
    save_binary(m.csr(), output)?;
    Ok(())
}

fn features(matrix: &Path, vector: Option<&Path>, density: Option<f64>, seed: u64, transpose: bool) -> Result<()> {
    let m = read_matrix(matrix, transpose)?;
    let cache = MatrixFeatureCache::new(&m)?;
    let x: InputVector<Real> = match (vector, density) {
        (Some(p), _) => match load_vector_market(p).with_context(|| format!("loading {}", p.display()))? {
            VectorFile::Dense(d) => InputVector::Dense(d),
            VectorFile::Sparse(s) => InputVector::Sparse(s),
        },
        (None, d) => {
            let d = d.unwrap_or(1.0);
            if !(0.0..=1.0).contains(&d) {
                bail!("density {d} must lie in [0, 1]");
            }
            let nnz = (d * m.cols() as f64).round() as usize;
            InputVector::Sparse(random_sparse_vector(m.cols(), nnz, &mut ChaCha8Rng::seed_from_u64(seed))?)
        }
    };
    let fv = LazyFeatureContext::new(&m, &cache, x.as_ref())?.full_vector();
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", Feature::ALL.map(Feature::name).join(","))?;
    writeln!(out, "{}", fv.0.map(|v| v.to_string()).join(","))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    matrix: &Path,
    kernels: &str,
    densities: &str,
    repeats: usize,
    seed: u64,
    threads: Option<usize>,
    timer: &str,
    output: Option<&Path>,
    transpose: bool,
) -> Result<()> {
    let m = read_matrix(matrix, transpose)?;
    let kernels = parse_kernels(kernels)?;
    let sweep: DensitySweep = densities.parse()?;
    let mut cfg = BenchConfig::new(repeats, workers(threads)?);
    cfg.timer = timer.parse()?;
    let mut out = output_writer(output)?;
    let names: Vec<&str> = kernels.iter().map(|k| k.name()).collect();
    writeln!(out, "nnz_x,x_sparsity,{}", names.join(","))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for nnz in sweep.points(m.cols()) {
        let x = InputVector::Sparse(random_sparse_vector(m.cols(), nnz, &mut rng)?);
        let mut row = vec![nnz.to_string(), (nnz as f64 / m.cols() as f64).to_string()];
        for &k in &kernels {
            row.push(format!("{:e}", benchmark_kernel(&m, &x, k, &cfg)?));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn gen_train(
    corpus: &Path,
    densities: &str,
    repeats: usize,
    split: &str,
    seed: u64,
    out: &Path,
    threads: Option<usize>,
    timer: &str,
) -> Result<()> {
    let fraction = parse_split(split)?;
    let mut matrices = Vec::new();
    for f in corpus_files(corpus)? {
        let name = f.file_stem().and_then(|s| s.to_str()).unwrap_or("matrix").to_string();
        matrices.push((name, read_matrix(&f, false)?));
    }
    let mut bench = BenchConfig::new(repeats, workers(threads)?);
    bench.timer = timer.parse::<Timer>()?;
    let cfg = TrainingConfig { densities: densities.parse()?, bench, seed };
    let samples = generate_training_data(&matrices, &cfg)?;
    if samples.is_empty() {
        bail!("no training samples were produced");
    }
    let (train, test) = split_samples(&samples, fraction, seed)?;
    fs::create_dir_all(out)?;
    save_training_csv(&out.join("train.csv"), &train)?;
    save_training_csv(&out.join("test.csv"), &test)?;
    eprintln!("{} samples from {} matrices: {} train, {} test", samples.len(), matrices.len(), train.len(), test.len());
    Ok(())
}

fn train(samples: &Path, out: &Path, folds: usize, cost_lambda: f64, seed: u64, hardware_tag: &str) -> Result<()> {
    let (train_path, test_path) = sample_files(samples);
    let train = load_training_csv(&train_path).with_context(|| format!("reading {}", train_path.display()))?;
    let test = match test_path {
        Some(p) => load_training_csv(&p).with_context(|| format!("reading {}", p.display()))?,
        None => Vec::new(),
    };
    let opts = TrainOptions {
        grid: SearchGrid { folds, seed, cost_lambda, ..SearchGrid::default() },
        hardware_tag: hardware_tag.to_string(),
        ..TrainOptions::default()
    };
    let bundle = train_selector(&train, &test, &opts)?;
    save_model(out, &bundle)?;
    for t in Target::ALL {
        let md = &bundle.tree(t).metadata;
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.1}%", 100.0 * v));
        eprintln!(
            "{}: depth={} weight={:?} cv={} test={}",
            t.name(),
            md.max_depth,
            md.class_weight,
            pct(md.cv_accuracy),
            pct(md.test_accuracy)
        );
    }
    Ok(())
}

fn rank_features(samples: &Path) -> Result<()> {
    let (train_path, _) = sample_files(samples);
    let samples = load_training_csv(&train_path).with_context(|| format!("reading {}", train_path.display()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "target,rank,feature,chi2")?;
    for t in Target::ALL {
        let (x, y) = design(&samples, t);
        for (i, (f, score)) in chi2_rank(&x, &y, t.n_classes(), t.mask())?.into_iter().enumerate() {
            writeln!(out, "{},{},{},{}", t.name(), i + 1, f.name(), score)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    app: App,
    matrix: &Path,
    model: Option<&Path>,
    source: usize,
    damping: f64,
    prune: f64,
    max_iters: usize,
    force_kernel: Option<&str>,
    threads: Option<usize>,
    stats_path: &Path,
    output: Option<&Path>,
    transpose: bool,
) -> Result<()> {
    let graph = read_matrix(matrix, transpose)?;
    let bundle: Option<Arc<SelectorBundle>> = match model {
        Some(p) => Some(Arc::new(load_model(p).with_context(|| format!("loading model {}", p.display()))?)),
        None => None,
    };
    let force = force_kernel.map(|s| s.parse::<KernelId>()).transpose().map_err(|e| anyhow!("{e}"))?;
    if bundle.is_none() && force.is_none() {
        bail!("run needs --model or --force-kernel");
    }
    let cfg = ExecutorConfig { workers: Some(workers(threads)?), force_kernel: force, ..Default::default() };
    let mut out = output_writer(output)?;
    let stats: TraceStats = match app {
        App::Bfs => {
            let mut exec = AdaptiveExecutor::new(Arc::new(graph.to_pattern()), bundle, cfg)?;
            let r = bfs(&mut exec, source)?;
            for l in &r.levels {
                if *l == UNREACHED {
                    writeln!(out, "-1")?;
                } else {
                    writeln!(out, "{l}")?;
                }
            }
            r.stats
        }
        App::Pagerank => {
            let mut exec = AdaptiveExecutor::new(Arc::new(pagerank_matrix(&graph)?), bundle, cfg)?;
            let r = pagerank_incremental(&mut exec, damping, prune, max_iters)?;
            for v in &r.rank.values {
                writeln!(out, "{v:e}")?;
            }
            r.stats
        }
    };
    out.flush()?;
    write_stats_csv(std::io::BufWriter::new(fs::File::create(stats_path)?), &stats)?;
    eprintln!("{}", summary_line(&stats));
    Ok(())
}

fn synth(
    kind: &str,
    n: usize,
    nnz: usize,
    exponent: f64,
    seed: u64,
    output: &Path,
    count: Option<usize>,
) -> Result<()> {
    let kind: SynthKind = kind.parse()?;
    let Some(count) = count else {
        let m: Matrix = generate_synthetic(&SynthSpec { kind, n, nnz, exponent, seed })?;
        save_matrix_market(m.csr(), output)?;
        return Ok(());
    };
    fs::create_dir_all(output)?;
    let avg = nnz as f64 / n.max(1) as f64;
    for i in 0..count {
        // sizes cycle through 1/2x, 1x, 2x; degree and exponent vary too
        let size = (n as f64 * [0.5, 1.0, 2.0][i % 3]).round().max(2.0) as usize;
        let degree = avg * [0.5, 1.0, 2.0, 4.0][(i / 3) % 4];
        let kind = if i % 2 == 0 { kind } else { other_kind(kind) };
        let spec = SynthSpec {
            kind,
            n: size,
            nnz: ((size as f64 * degree).round() as usize).clamp(1, size * size),
            exponent: exponent + 0.25 * (i % 4) as f64,
            seed: seed.wrapping_add(i as u64),
        };
        let m: Matrix = generate_synthetic(&spec)?;
        let tag = match kind {
            SynthKind::UniformDegree => "uniform",
            SynthKind::PowerLaw => "powerlaw",
        };
        save_matrix_market(m.csr(), output.join(format!("synth{i:03}_{tag}.mtx")))?;
    }
    Ok(())
}

fn other_kind(k: SynthKind) -> SynthKind {
    match k {
        SynthKind::UniformDegree => SynthKind::PowerLaw,
        SynthKind::PowerLaw => SynthKind::UniformDegree,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert { input, output, transpose } => convert(&input, &output, transpose),
        Command::Features { matrix, vector, density, seed, transpose } => {
            features(&matrix, vector.as_deref(), density, seed, transpose)
        }
        Command::Bench { matrix, kernels, densities, repeats, seed, threads, timer, output, transpose } => {
            bench(&matrix, &kernels, &densities, repeats, seed, threads, &timer, output.as_deref(), transpose)
        }
        Command::GenTrain { corpus, densities, repeats, split, seed, out, threads, timer } => {
            gen_train(&corpus, &densities, repeats, &split, seed, &out, threads, &timer)
        }
        Command::Train { samples, out, folds, cost_lambda, seed, hardware_tag } => {
            train(&samples, &out, folds, cost_lambda, seed, &hardware_tag)
        }
        Command::RankFeatures { samples } => rank_features(&samples),
        Command::Run {
            app,
            matrix,
            model,
            source,
            damping,
            prune,
            max_iters,
            force_kernel,
            threads,
            stats,
            output,
            seed: _,
            transpose,
        } => run(
            app,
            &matrix,
            model.as_deref(),
            source,
            damping,
            prune,
            max_iters,
            force_kernel.as_deref(),
            threads,
            &stats,
            output.as_deref(),
            transpose,
        ),
        Command::Synth { kind, n, nnz, exponent, seed, output, count } => {
            synth(&kind, n, nnz, exponent, seed, &output, count)
        }
    }
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            || matches!(c.downcast_ref::<adaspmv::Error>(), Some(adaspmv::Error::Io(io)) if io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            // keep the message, drop the usage block
            let msg: Vec<&str> = text.lines().take_while(|l| !l.trim().is_empty()).map(str::trim).collect();
            eprintln!("{}", msg.join(" "));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
