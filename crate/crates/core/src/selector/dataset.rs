//! Labelled training samples and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::features::{Feature, FeatureVector, FEATURE_COUNT};
use crate::kernels::{KernelId, Pattern, Workload, Writeback};
use crate::selector::tree::Target;

/// Class labels for the three decisions, derived from per-kernel timings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Labels {
    pub pattern: Pattern,
    pub workload: Workload,
    pub writeback: Writeback,
}

impl Labels {
    /// Pattern and workload follow the overall fastest kernel; write-back
    /// is the faster strategy among the four column kernels. Ties go to the
    /// lower kernel id.
    pub fn from_timings(timings: &[f64; 8]) -> Result<Self> {
        if timings.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return invalid("kernel timings must be finite and nonnegative");
        }
        let best = argmin(KernelId::ALL.iter().copied(), timings);
        let col = argmin(KernelId::ALL.iter().copied().filter(|k| k.pattern() == Pattern::ColSpMSpV), timings);
        Ok(Labels {
            pattern: best.pattern(),
            workload: best.workload(),
            writeback: col.writeback().expect("column kernels carry a write-back"),
        })
    }

    pub fn class(&self, target: Target) -> usize {
        match target {
            Target::Pattern => self.pattern.index(),
            Target::Workload => self.workload.index(),
            Target::Writeback => self.writeback.index(),
        }
    }
}

fn argmin(kernels: impl Iterator<Item = KernelId>, timings: &[f64; 8]) -> KernelId {
    let mut best: Option<KernelId> = None;
    for k in kernels {
        if best.map_or(true, |b| timings[k.index()] < timings[b.index()]) {
            best = Some(k);
        }
    }
    best.expect("non-empty kernel set")
}

/// Fastest kernel for a timing row.
pub fn oracle_kernel(timings: &[f64; 8]) -> KernelId {
    argmin(KernelId::ALL.iter().copied(), timings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    /// Source matrix name.
    pub matrix: String,
    /// Requested vector density (nonzeros) in the sweep.
    pub density: usize,
    pub features: FeatureVector,
    /// Median seconds per kernel, indexed by kernel id.
    pub timings: [f64; 8],
    pub labels: Labels,
}

impl TrainingSample {
    pub fn new(matrix: impl Into<String>, density: usize, features: FeatureVector, timings: [f64; 8]) -> Result<Self> {
        Ok(TrainingSample {
            matrix: matrix.into(),
            density,
            features,
            labels: Labels::from_timings(&timings)?,
            timings,
        })
    }

    pub fn oracle(&self) -> KernelId {
        oracle_kernel(&self.timings)
    }
}

/// Feature rows and class labels for one target.
pub fn design(samples: &[TrainingSample], target: Target) -> (Vec<FeatureVector>, Vec<usize>) {
    (samples.iter().map(|s| s.features).collect(), samples.iter().map(|s| s.labels.class(target)).collect())
}

/// Shuffles with `seed` and cuts `train_fraction` off the front.
pub fn split_samples(
    samples: &[TrainingSample],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<TrainingSample>, Vec<TrainingSample>)> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return invalid("train fraction must lie in [0, 1]");
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (samples.len() as f64 * train_fraction).round() as usize;
    let pick = |ids: &[usize]| ids.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    Ok((pick(&order[..cut]), pick(&order[cut..])))
}

fn header() -> Vec<String> {
    let mut h = vec!["matrix".to_string(), "density".to_string()];
    h.extend(Feature::ALL.iter().map(|f| f.name().to_string()));
    h.extend(KernelId::ALL.iter().map(|k| format!("t_{}", k.name())));
    h.extend(Target::ALL.iter().map(|t| format!("label_{}", t.name())));
    h
}

pub fn write_training_csv<W: Write>(out: W, samples: &[TrainingSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for s in samples {
        let mut rec = vec![s.matrix.clone(), s.density.to_string()];
        rec.extend(s.features.0.iter().map(|v| v.to_string()));
        rec.extend(s.timings.iter().map(|v| v.to_string()));
        for t in Target::ALL {
            rec.push(t.class_names()[s.labels.class(t)].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_training_csv<R: Read>(input: R) -> Result<Vec<TrainingSample>> {
    let mut r = csv::Reader::from_reader(input);
    let expected = header();
    let got: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if got != expected {
        return Err(Error::Parse { line: 1, message: "training CSV header does not match the feature order".into() });
    }
    let mut samples = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |j: usize| -> Result<f64> {
            rec[j].parse::<f64>().map_err(|e| Error::Parse { line, message: format!("column {}: {e}", expected[j]) })
        };
        let density = rec[1].parse::<usize>().map_err(|e| Error::Parse { line, message: format!("density: {e}") })?;
        let mut features = [0.0; FEATURE_COUNT];
        for (k, f) in features.iter_mut().enumerate() {
            *f = num(2 + k)?;
        }
        let mut timings = [0.0; 8];
        for (k, t) in timings.iter_mut().enumerate() {
            *t = num(2 + FEATURE_COUNT + k)?;
        }
        let sample = TrainingSample::new(&rec[0], density, FeatureVector(features), timings)
            .map_err(|e| Error::Parse { line, message: e.to_string() })?;
        for (k, t) in Target::ALL.iter().enumerate() {
            let stored = &rec[2 + FEATURE_COUNT + 8 + k];
            if t.class_names()[sample.labels.class(*t)] != stored {
                return Err(Error::Parse { line, message: format!("{} label disagrees with timings", t.name()) });
            }
        }
        samples.push(sample);
    }
    Ok(samples)
}

pub fn save_training_csv(path: &Path, samples: &[TrainingSample]) -> Result<()> {
    write_training_csv(std::io::BufWriter::new(std::fs::File::create(path)?), samples)
}

pub fn load_training_csv(path: &Path) -> Result<Vec<TrainingSample>> {
    read_training_csv(std::io::BufReader::new(std::fs::File::open(path)?))
}
