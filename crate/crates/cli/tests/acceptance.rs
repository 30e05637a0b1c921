//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p adaspmv-cli --test acceptance`; pass criterion
//! numbers as arguments (`-- 1 3`) to run a subset.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use adaspmv::apps::{bfs, generate_synthetic, pagerank_incremental, pagerank_matrix, SynthKind, SynthSpec, UNREACHED};
use adaspmv::features::{gini_coefficient, Feature, LazyFeatureContext, MatrixFeatureCache};
use adaspmv::kernels::{run_kernel, KernelId, KernelOptions, Pattern, VectorRef, Workers};
use adaspmv::runtime::{
    fixed_kernel_totals, generate_training_data, regret, time_all_kernels, AdaptiveExecutor, BenchConfig,
    ExecutorConfig, InputVector, TrainingConfig,
};
use adaspmv::selector::{
    design, split_samples, train_selector, Node, SelectorBundle, Target, TrainOptions, TrainingSample,
};
use adaspmv::sparse::{DenseVector, DualMatrix, SparseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within_budget(start: Instant, budget: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t <= budget, format!("{:.1}s of {}s", t.as_secs_f64(), budget.as_secs()))
}

// ---------------------------------------------------------------- oracles

fn naive_product(rows: usize, triplets: &[(usize, usize, f64)], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; rows];
    for &(r, c, v) in triplets {
        y[r] += v * x[c];
    }
    y
}

fn pairwise_gini(xs: &[usize]) -> f64 {
    let total: usize = xs.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let mut diff = 0u128;
    for &a in xs {
        for &b in xs {
            diff += a.abs_diff(b) as u128;
        }
    }
    diff as f64 / (2.0 * xs.len() as f64 * total as f64)
}

fn queue_bfs(n: usize, edges: &[(usize, usize)], source: usize) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(r, c) in edges {
        adj[c].push(r);
    }
    let mut level = vec![UNREACHED; n];
    level[source] = 0;
    let mut q = VecDeque::from([source]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if level[v] == UNREACHED {
                level[v] = level[u] + 1;
                q.push_back(v);
            }
        }
    }
    level
}

fn dense_pagerank(m: &DualMatrix<f64>, damping: f64) -> Vec<f64> {
    let n = m.rows();
    let trip = m.csr().triplets();
    let mut r = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let mut next = vec![1.0 / n as f64; n];
        for &(i, j, v) in &trip {
            next[i] += damping * v * r[j];
        }
        let diff: f64 = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
        r = next;
        if diff < 1e-16 {
            break;
        }
    }
    r
}

fn random_triplets(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if rng.gen_bool(density) {
                t.push((r, c, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    t
}

fn random_dense(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<f64> {
    (0..n).map(|_| if rng.gen_bool(density) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect()
}

fn sparse_of(x: &[f64]) -> SparseVector<f64> {
    DenseVector::new(x.to_vec()).to_sparse()
}

fn run_all(m: &DualMatrix<f64>, x: &[f64], workers: &Workers) -> Vec<(KernelId, Vec<f64>)> {
    let dense = DenseVector::new(x.to_vec());
    let sparse = sparse_of(x);
    KernelId::ALL
        .iter()
        .map(|&k| {
            let input = match k.pattern() {
                Pattern::SpMV => VectorRef::Dense(&dense),
                _ => VectorRef::Sparse(&sparse),
            };
            (k, run_kernel(k, m, input, workers, KernelOptions::default()).unwrap().dense.values)
        })
        .collect()
}

// ------------------------------------------------------------- criteria

fn c1_kernel_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let pools = [Workers::single(), Workers::new(3).unwrap(), Workers::new(8).unwrap()];
    let mut cases = 0;
    let mut worst = 0.0f64;
    let mut failures = 0;
    let mut check = |rows: usize, cols: usize, t: &[(usize, usize, f64)], x: &[f64], w: &Workers| {
        let m = DualMatrix::from_triplets(rows, cols, t).unwrap();
        let want = naive_product(rows, t, x);
        for (k, got) in run_all(&m, x, w) {
            let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            if err > 1e-10 || got.len() != rows {
                failures += 1;
                eprintln!("  kernel {k} off by {err} on {rows}x{cols}");
            }
        }
    };
    // edge cases first
    let edge: Vec<(usize, usize, f64, f64)> = vec![
        (50, 60, 0.1, 0.0), // empty vector
        (50, 60, 0.1, 1.0), // dense vector
        (1, 300, 0.3, 0.5), // single row
        (300, 1, 0.3, 1.0), // single column
        (40, 40, 0.0, 0.7), // all-zero matrix
        (1, 1, 1.0, 1.0),
    ];
    for (i, &(r, c, md, xd)) in edge.iter().enumerate() {
        let t = random_triplets(&mut rng, r, c, md);
        let x = random_dense(&mut rng, c, xd);
        check(r, c, &t, &x, &pools[i % 3]);
        cases += 1;
    }
    while cases < 1200 {
        let rows = rng.gen_range(1..=500);
        let cols = rng.gen_range(1..=500);
        // mostly sparse matrices, with some dense ones in the mix
        let md = if rng.gen_bool(0.1) { rng.gen_range(0.0..1.0) } else { rng.gen_range(0.0..0.05) };
        let xd = rng.gen_range(0.0..=1.0);
        let t = random_triplets(&mut rng, rows, cols, md);
        let x = random_dense(&mut rng, cols, xd);
        check(rows, cols, &t, &x, &pools[cases % 3]);
        cases += 1;
    }
    let (fast, time) = within_budget(start, Duration::from_secs(120));
    outcome(failures == 0 && fast, format!("{cases} cases x 8 kernels, max abs error {worst:.2e}, {time}"))
}

fn c2_writeback_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let w = Workers::new(4).unwrap();
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let cases = 300;
    for case in 0..cases {
        let rows = rng.gen_range(1..=400);
        let cols = rng.gen_range(1..=400);
        let d = rng.gen_range(0.0..0.2);
        let t = random_triplets(&mut rng, rows, cols, d);
        let m = DualMatrix::from_triplets(rows, cols, &t).unwrap();
        let d = rng.gen_range(0.0..=1.0);
        let x = sparse_of(&random_dense(&mut rng, cols, d));
        for (atomic, sort) in [
            (KernelId::ColDirectAtomic, KernelId::ColDirectSort),
            (KernelId::ColBalancedAtomic, KernelId::ColBalancedSort),
        ] {
            let a = run_kernel(atomic, &m, VectorRef::Sparse(&x), &w, KernelOptions::default()).unwrap().dense.values;
            let s = run_kernel(sort, &m, VectorRef::Sparse(&x), &w, KernelOptions::default()).unwrap().dense.values;
            let pattern_a: Vec<bool> = a.iter().map(|v| *v != 0.0).collect();
            let pattern_s: Vec<bool> = s.iter().map(|v| *v != 0.0).collect();
            let err = a.iter().zip(&s).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            if pattern_a != pattern_s || err > 1e-10 {
                bad.push(format!("case {case}: {atomic} vs {sort}"));
            }
            let bits: Vec<u64> = s.iter().map(|v| v.to_bits()).collect();
            for _ in 0..4 {
                let again = run_kernel(sort, &m, VectorRef::Sparse(&x), &w, KernelOptions::default()).unwrap();
                if again.dense.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>() != bits {
                    bad.push(format!("case {case}: {sort} not bitwise repeatable"));
                }
            }
        }
    }
    let (fast, time) = within_budget(start, Duration::from_secs(60));
    for b in bad.iter().take(5) {
        eprintln!("  {b}");
    }
    outcome(
        bad.is_empty() && fast,
        format!("{cases} cases, same support, max diff {worst:.2e}, sort bitwise stable over 5 runs, {time}"),
    )
}

fn c3_feature_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_gini = 0.0f64;
    for _ in 0..200 {
        let len = rng.gen_range(1..300);
        let max = if rng.gen_bool(0.2) { 3 } else { 10_000 };
        let xs: Vec<usize> = (0..len).map(|_| rng.gen_range(0..=max)).collect();
        worst_gini = worst_gini.max((gini_coefficient(&xs).unwrap() - pairwise_gini(&xs)).abs());
    }
    let exact = gini_coefficient(&[0, 0, 0, 4]).unwrap() == 0.75;

    let mut worst_feature = 0.0f64;
    let mut worst_name = "";
    for _ in 0..50 {
        let rows = rng.gen_range(1..200);
        let cols = rng.gen_range(1..200);
        let d = rng.gen_range(0.0..0.3);
        let t = random_triplets(&mut rng, rows, cols, d);
        let m = DualMatrix::from_triplets(rows, cols, &t).unwrap();
        let d = rng.gen_range(0.0..=1.0);
        let x = random_dense(&mut rng, cols, d);
        let dense = DenseVector::new(x.clone());
        let sparse = sparse_of(&x);

        let mut deg = vec![0usize; rows];
        for &(r, _, _) in &t {
            deg[r] += 1;
        }
        let nnz = t.len();
        let max = *deg.iter().max().unwrap();
        let min = *deg.iter().min().unwrap();
        let avg = nnz as f64 / rows as f64;
        let var = deg.iter().map(|&d| (d as f64 - avg).powi(2)).sum::<f64>() / rows as f64;
        let nnz_x = x.iter().filter(|v| **v != 0.0).count();
        let nnz_s = t.iter().filter(|&&(_, c, _)| x[c] != 0.0).count();
        let oracle = [
            rows as f64,
            cols as f64,
            nnz as f64,
            max as f64,
            min as f64,
            avg,
            (max - min) as f64 / cols as f64,
            var.sqrt(),
            pairwise_gini(&deg),
            nnz_x as f64,
            nnz_x as f64 / cols as f64,
            nnz_s as f64,
            if nnz == 0 { 0.0 } else { nnz_s as f64 / nnz as f64 },
        ];
        let cache = MatrixFeatureCache::new(&m).unwrap();
        for v in [VectorRef::Dense(&dense), VectorRef::Sparse(&sparse)] {
            let got = LazyFeatureContext::new(&m, &cache, v).unwrap().full_vector();
            for f in Feature::ALL {
                let err = (got[f] - oracle[f.index()]).abs() / oracle[f.index()].abs().max(1.0);
                if err > worst_feature {
                    worst_feature = err;
                    worst_name = f.name();
                }
            }
        }
    }
    outcome(
        worst_gini <= 1e-12 && exact && worst_feature <= 1e-12,
        format!(
            "gini vs pairwise max {worst_gini:.1e} on 200 arrays, [0,0,0,4] -> 0.75 {}, 13 features on 50 pairs max rel {worst_feature:.1e}{}",
            if exact { "exact" } else { "WRONG" },
            if worst_feature > 0.0 { format!(" ({worst_name})") } else { String::new() }
        ),
    )
}

/// Desk corpus shared by the learning criteria.
fn desk_corpus() -> Vec<(String, DualMatrix<f64>)> {
    let mut out = Vec::new();
    for i in 0..32 {
        let n = [4000, 8000, 16000][i % 3];
        let degree = [2.0, 4.0, 8.0, 16.0][(i / 3) % 4];
        let kind = if i % 2 == 0 { SynthKind::PowerLaw } else { SynthKind::UniformDegree };
        let spec = SynthSpec {
            kind,
            n,
            nnz: (n as f64 * degree) as usize,
            exponent: 1.8 + 0.2 * (i % 4) as f64,
            seed: 1000 + i as u64,
        };
        out.push((format!("synth{i:02}"), generate_synthetic(&spec).unwrap()));
    }
    out
}

struct Trained {
    bundle: Arc<SelectorBundle>,
    corpus: Vec<(String, DualMatrix<f64>)>,
}

fn class_counts(samples: &[TrainingSample], t: Target) -> Vec<usize> {
    let mut c = vec![0; t.n_classes()];
    for y in design(samples, t).1 {
        c[y] += 1;
    }
    c
}

fn c4_selector_quality(trained: &mut Option<Trained>) -> Outcome {
    let start = Instant::now();
    let corpus = desk_corpus();
    let workers = Workers::from_env().unwrap();
    let cfg = TrainingConfig {
        densities: "uniform:10,geometric:10".parse().unwrap(),
        bench: BenchConfig::new(5, workers),
        seed: 17,
    };
    let samples = generate_training_data(&corpus, &cfg).unwrap();
    let points = samples.len() as f64 / corpus.len() as f64;
    let (train, test) = split_samples(&samples, 0.7, 17).unwrap();
    let bundle = train_selector(&train, &test, &TrainOptions::default()).unwrap();
    let mut pass = points >= 16.0 && corpus.len() >= 30;
    let mut parts = Vec::new();
    for t in Target::ALL {
        let acc = bundle.tree(t).metadata.test_accuracy.unwrap();
        let counts = class_counts(&samples, t);
        let test_counts = class_counts(&test, t);
        let present = counts.iter().filter(|&&c| c > 0).count();
        let majority = *test_counts.iter().max().unwrap() as f64 / test.len() as f64;
        let ok = if acc >= 0.80 {
            true
        } else {
            // the timing landscape may leave a class nearly or fully empty
            present <= 1 || acc >= majority + 0.05
        };
        pass &= ok;
        parts.push(format!(
            "{} {:.1}% (classes {:?}, majority {:.1}%)",
            t.name(),
            100.0 * acc,
            counts,
            100.0 * majority
        ));
    }
    let (fast, time) = within_budget(start, Duration::from_secs(15 * 60));
    *trained = Some(Trained { bundle: Arc::new(bundle), corpus });
    outcome(
        pass && fast,
        format!(
            "{} matrices x {:.1} points, {} train / {} test; {}; {time}",
            trained.as_ref().unwrap().corpus.len(),
            points,
            train.len(),
            test.len(),
            parts.join("; ")
        ),
    )
}

fn trace_for(m: &DualMatrix<f64>, seed: u64) -> Vec<InputVector<f64>> {
    // BFS frontiers from vertex 0, with a dense vector after every third
    let pattern = Arc::new(m.to_pattern());
    let cfg = ExecutorConfig {
        workers: Some(Workers::single()),
        force_kernel: Some(KernelId::ColDirectAtomic),
        ..Default::default()
    };
    let mut exec = AdaptiveExecutor::new(pattern, None, cfg).unwrap();
    let levels = bfs(&mut exec, 0).unwrap().levels;
    let depth = levels.iter().filter(|&&l| l != UNREACHED).max().copied().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for l in 0..=depth {
        let idx: Vec<usize> = (0..levels.len()).filter(|&i| levels[i] == l).collect();
        let vals = vec![1.0; idx.len()];
        out.push(InputVector::Sparse(SparseVector::new(m.cols(), idx, vals).unwrap()));
        if l % 3 == 2 {
            let d: Vec<f64> = (0..m.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            out.push(InputVector::Dense(DenseVector::new(d)));
        }
    }
    out
}

fn c5_adaptivity(trained: &Trained) -> Outcome {
    let start = Instant::now();
    let workers = Workers::from_env().unwrap();
    let bench = BenchConfig::new(10, workers.clone());
    // the three largest corpus matrices of different shapes
    let picks: Vec<&(String, DualMatrix<f64>)> =
        trained.corpus.iter().filter(|(_, m)| m.rows() == 16000).take(3).collect();
    let mut table = Vec::new();
    let mut chosen = Vec::new();
    let mut outputs_ok = true;
    let mut pattern_mix = BTreeSet::new();
    for (i, (_, m)) in picks.iter().enumerate() {
        let trace = trace_for(m, 50 + i as u64);
        for x in &trace {
            table.push(time_all_kernels(m, x, &bench).unwrap());
        }
        let cfg = ExecutorConfig { workers: Some(workers.clone()), ..Default::default() };
        let mut exec = AdaptiveExecutor::new(Arc::new(m.clone()), Some(trained.bundle.clone()), cfg).unwrap();
        let dense_inputs: Vec<Vec<f64>> = trace.iter().map(|x| x.to_dense().values).collect();
        for (x, dense) in trace.into_iter().zip(&dense_inputs) {
            let it = exec.execute_iteration(x).unwrap();
            let want = naive_product(m.rows(), &m.csr().triplets(), dense);
            outputs_ok &= it.output.dense.values.iter().zip(&want).all(|(a, b)| (a - b).abs() <= 1e-9);
            pattern_mix.insert(format!("{:?}", it.report.kernel.pattern()));
            chosen.push(it.report.kernel);
        }
    }
    let r = regret(&chosen, &table).unwrap();
    let adaptive: f64 = chosen.iter().zip(&table).map(|(k, row)| row[k.index()]).sum();
    let totals = fixed_kernel_totals(&table);
    let (best_k, best_fixed) =
        KernelId::ALL.iter().map(|&k| (k, totals[k.index()])).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let (fast, time) = within_budget(start, Duration::from_secs(600));
    outcome(
        r <= 1.15 && adaptive <= best_fixed && outputs_ok && picks.len() >= 3 && fast,
        format!(
            "{} iterations over {} matrices: regret {r:.3}, adaptive {:.3} ms vs best fixed {best_k} {:.3} ms (ratio {:.3}); patterns {:?}; {time}",
            chosen.len(),
            picks.len(),
            adaptive * 1e3,
            best_fixed * 1e3,
            adaptive / best_fixed,
            pattern_mix
        ),
    )
}

/// Features read along the cascade's taken paths.
fn path_features(bundle: &SelectorBundle, x: &[Option<f64>; 13]) -> Option<BTreeSet<usize>> {
    let mut used = BTreeSet::new();
    let mut walk = |t: Target| -> Option<usize> {
        let nodes = &bundle.tree(t).nodes;
        let mut i = 0;
        loop {
            match nodes[i] {
                Node::Leaf { leaf } => return Some(leaf),
                Node::Split { feature, threshold, left, right } => {
                    used.insert(feature);
                    i = if x[feature]? <= threshold { left } else { right };
                }
            }
        }
    };
    let pattern = walk(Target::Pattern)?;
    walk(Target::Workload)?;
    if pattern == Pattern::ColSpMSpV.index() {
        walk(Target::Writeback)?;
    }
    Some(used)
}

fn c6_overhead(trained: &Trained) -> Outcome {
    let mut fractions = Vec::new();
    let mut lazy_ok = true;
    let mut notes = Vec::new();
    for (i, kind) in [SynthKind::PowerLaw, SynthKind::UniformDegree].into_iter().enumerate() {
        let spec = SynthSpec { kind, n: 100_000, nnz: 800_000, exponent: 2.0, seed: 60 + i as u64 };
        let m = Arc::new(generate_synthetic::<f64>(&spec).unwrap().to_pattern());
        let cfg = ExecutorConfig { workers: Some(Workers::from_env().unwrap()), ..Default::default() };
        let mut exec = AdaptiveExecutor::new(m, Some(trained.bundle.clone()), cfg).unwrap();
        let r = bfs(&mut exec, 0).unwrap();
        fractions.push(r.stats.overhead_fraction);
        let mut touched = BTreeSet::new();
        for rep in &r.stats.reports {
            let computed: BTreeSet<usize> = (0..13).filter(|&f| rep.features[f].is_some()).collect();
            match path_features(&trained.bundle, &rep.features) {
                Some(path) => lazy_ok &= path == computed,
                None => lazy_ok = false,
            }
            touched.extend(computed);
        }
        let gini_used = touched.contains(&Feature::Gini.index());
        let stats_used = (3..=7).any(|f| touched.contains(&f));
        lazy_ok &= exec.cache().gini_scans() == usize::from(gini_used);
        lazy_ok &= exec.cache().row_stat_scans() == usize::from(stats_used);
        notes.push(format!(
            "{kind:?} {:.1}% over {} iters (features read {:?})",
            100.0 * r.stats.overhead_fraction,
            r.stats.reports.len(),
            touched.iter().map(|&f| Feature::from_index(f).unwrap().name()).collect::<Vec<_>>()
        ));
    }
    let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
    outcome(
        mean <= 0.20 && lazy_ok,
        format!(
            "mean overhead {:.1}% (n=1e5): {}; only path features computed: {}",
            100.0 * mean,
            notes.join(", "),
            if lazy_ok { "yes" } else { "NO" }
        ),
    )
}

fn c7_applications() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut bfs_bad = 0;
    for g in 0..100 {
        let n = rng.gen_range(1..=1000);
        let edges_per = rng.gen_range(0.5..4.0);
        let count = (n as f64 * edges_per) as usize;
        let edges: Vec<(usize, usize)> = (0..count).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let trip: Vec<(usize, usize, f64)> = edges.iter().map(|&(r, c)| (r, c, 1.0)).collect();
        let m = DualMatrix::from_triplets(n, n, &trip).unwrap();
        let source = rng.gen_range(0..n);
        let cfg = ExecutorConfig {
            workers: Some(Workers::new(1 + g % 4).unwrap()),
            force_kernel: Some(KernelId::ALL[g % 8]),
            ..Default::default()
        };
        let mut exec = AdaptiveExecutor::new(Arc::new(m), None, cfg).unwrap();
        if bfs(&mut exec, source).unwrap().levels != queue_bfs(n, &edges, source) {
            bfs_bad += 1;
        }
    }

    let mut pr_worst = 0.0f64;
    for g in 0..20 {
        let n = rng.gen_range(2..=100);
        let trip: Vec<(usize, usize, f64)> =
            (0..n * 3).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), 1.0)).collect();
        let graph = DualMatrix::from_triplets(n, n, &trip).unwrap();
        let pm = pagerank_matrix(&graph).unwrap();
        let oracle = dense_pagerank(&pm, 0.85);
        let cfg = ExecutorConfig {
            workers: Some(Workers::new(2).unwrap()),
            force_kernel: Some(KernelId::ALL[g % 8]),
            ..Default::default()
        };
        let mut exec = AdaptiveExecutor::new(Arc::new(pm), None, cfg).unwrap();
        let r = pagerank_incremental(&mut exec, 0.85, 0.0, 5000).unwrap();
        let err: f64 = r.rank.values.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).sum();
        pr_worst = pr_worst.max(err);
    }

    let path = DualMatrix::from_triplets(
        4,
        4,
        &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0), (2, 3, 1.0), (3, 2, 1.0)],
    )
    .unwrap();
    let forced = |k| ExecutorConfig { workers: Some(Workers::single()), force_kernel: Some(k), ..Default::default() };
    let mut exec = AdaptiveExecutor::new(Arc::new(path), None, forced(KernelId::RowDirect)).unwrap();
    let pb = bfs(&mut exec, 0).unwrap();
    let path_ok = pb.levels == vec![0, 1, 2, 3] && pb.stats.reports.len() == 4;
    let pair = DualMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let mut exec =
        AdaptiveExecutor::new(Arc::new(pagerank_matrix(&pair).unwrap()), None, forced(KernelId::SpmvDirect)).unwrap();
    let pr = pagerank_incremental(&mut exec, 0.85, 0.0, 5000).unwrap();
    let sym_ok = pr.rank.values[0] == pr.rank.values[1];
    outcome(
        bfs_bad == 0 && pr_worst <= 1e-8 && path_ok && sym_ok,
        format!(
            "BFS {}/100 graphs match queue BFS; PageRank prune=0 worst L1 {pr_worst:.1e} on 20 graphs; path {}; symmetric pair {}",
            100 - bfs_bad,
            if path_ok { "ok" } else { "WRONG" },
            if sym_ok { "equal" } else { "UNEQUAL" }
        ),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_adaspmv")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{:?}: {}", args.first(), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn pipeline(dir: &Path, timer: &str) -> Result<(), String> {
    let d = |p: &str| dir.join(p).to_string_lossy().into_owned();
    let corpus = d("corpus");
    cli(&["synth", "--n", "3000", "--nnz", "24000", "--count", "6", "--seed", "5", "--output", &corpus])?;
    cli(&[
        "gen-train",
        "--corpus",
        &corpus,
        "--densities",
        "uniform:8,geometric:8",
        "--repeats",
        "3",
        "--split",
        "7:3",
        "--seed",
        "11",
        "--out",
        &d("samples"),
        "--timer",
        timer,
    ])?;
    cli(&["train", "--samples", &d("samples"), "--out", &d("model.json"), "--folds", "5"])?;
    cli(&[
        "run",
        "--app",
        "bfs",
        "--matrix",
        &d("corpus/synth000_powerlaw.mtx"),
        "--model",
        &d("model.json"),
        "--stats",
        &d("bfs.csv"),
        "--output",
        &d("levels.txt"),
        "--seed",
        "11",
    ])?;
    cli(&[
        "run",
        "--app",
        "pagerank",
        "--matrix",
        &d("corpus/synth001_uniform.mtx"),
        "--model",
        &d("model.json"),
        "--stats",
        &d("pr.csv"),
        "--output",
        &d("ranks.txt"),
        "--seed",
        "11",
    ])
}

fn read(dir: &Path, p: &str) -> String {
    std::fs::read_to_string(dir.join(p)).unwrap_or_default()
}

/// Keeps the given CSV columns (by header prefix test).
fn columns(csv: &str, keep: impl Fn(&str) -> bool) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else { return String::new() };
    let idx: Vec<usize> = header.split(',').enumerate().filter(|(_, h)| keep(h)).map(|(i, _)| i).collect();
    std::iter::once(header)
        .chain(lines)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            idx.iter().map(|&i| f[i]).collect::<Vec<_>>().join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn trees_only(model: &str) -> String {
    // everything except the metadata block and accuracies
    let v: serde_json::Value = serde_json::from_str(model).unwrap_or_default();
    let trees: Vec<_> = v["trees"]
        .as_array()
        .map(|a| a.iter().map(|t| (t["target"].clone(), t["mask"].clone(), t["nodes"].clone())).collect())
        .unwrap_or_default();
    format!("{trees:?}")
}

fn c8_determinism() -> Outcome {
    let start = Instant::now();
    let root = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for timer in ["model", "wall"] {
        let a = root.path().join(format!("{timer}-a"));
        let b = root.path().join(format!("{timer}-b"));
        if let Err(e) = pipeline(&a, timer).and_then(|_| pipeline(&b, timer)) {
            return outcome(false, format!("pipeline failed: {e}"));
        }
        let feature = |h: &str| !h.starts_with("t_") && !h.starts_with("label_");
        let label = |h: &str| h.starts_with("label_");
        let kernel = |h: &str| h == "kernel" || h == "nnz_x";
        let mut same = |what: &str, x: String, y: String| -> bool {
            let eq = !x.is_empty() && x == y;
            if !eq && timer == "model" {
                notes.push(format!("{timer}: {what} differ"));
            }
            eq
        };
        let features_eq = ["samples/train.csv", "samples/test.csv"]
            .iter()
            .all(|f| same("features", columns(&read(&a, f), feature), columns(&read(&b, f), feature)));
        let labels_eq = ["samples/train.csv", "samples/test.csv"]
            .iter()
            .all(|f| same("labels", columns(&read(&a, f), label), columns(&read(&b, f), label)));
        let trees_eq = same("trees", trees_only(&read(&a, "model.json")), trees_only(&read(&b, "model.json")));
        let kernels_eq =
            same("bfs kernels", columns(&read(&a, "bfs.csv"), kernel), columns(&read(&b, "bfs.csv"), kernel))
                & same("pagerank kernels", columns(&read(&a, "pr.csv"), kernel), columns(&read(&b, "pr.csv"), kernel))
                & same("levels", read(&a, "levels.txt"), read(&b, "levels.txt"));
        if timer == "model" {
            // labels come from a deterministic cost model, so everything must replay
            pass &= features_eq && labels_eq && trees_eq && kernels_eq;
            notes.push(format!(
                "model timer: features {} labels {} trees {} kernels {}",
                features_eq, labels_eq, trees_eq, kernels_eq
            ));
        } else {
            // wall-clock labels can legitimately differ; features may not
            pass &= features_eq;
            notes.push(format!(
                "wall timer: features {} (labels {}, trees {}, kernels {}: informational)",
                features_eq, labels_eq, trees_eq, kernels_eq
            ));
        }
    }
    notes.push(format!("{:.1}s", start.elapsed().as_secs_f64()));
    outcome(pass, notes.join("; "))
}

fn main() {
    let wanted: BTreeSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let on = |c: u32| wanted.is_empty() || wanted.contains(&c);
    let names = [
        "kernel correctness",
        "write-back equivalence",
        "feature fidelity",
        "selector quality",
        "adaptivity value",
        "overhead bound",
        "applications",
        "pipeline determinism",
    ];
    let mut trained = None;
    let mut failed = 0;
    for c in 1..=8u32 {
        // 5 and 6 reuse the selector trained for 4
        if !on(c) && !(c == 4 && (on(5) || on(6))) {
            continue;
        }
        let result = match c {
            1 => c1_kernel_correctness(),
            2 => c2_writeback_equivalence(),
            3 => c3_feature_fidelity(),
            4 => c4_selector_quality(&mut trained),
            5 => c5_adaptivity(trained.as_ref().unwrap()),
            6 => c6_overhead(trained.as_ref().unwrap()),
            7 => c7_applications(),
            _ => c8_determinism(),
        };
        if !result.pass {
            failed += 1;
        }
        println!(
            "ACCEPTANCE {c} {:<24} {}  {}",
            names[c as usize - 1],
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
