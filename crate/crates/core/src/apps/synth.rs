//! Seeded synthetic square matrices with controlled row-degree shape.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{CsrMatrix, DualMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Every row holds `nnz / n` entries, give or take one.
    UniformDegree,
    /// Row degrees follow a Pareto law with the given exponent.
    PowerLaw,
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform-degree" => Ok(SynthKind::UniformDegree),
            "power-law" | "powerlaw" => Ok(SynthKind::PowerLaw),
            other => invalid(format!("unknown synthetic kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n: usize,
    pub nnz: usize,
    /// Density exponent of the degree law (power-law kind only), > 1.
    pub exponent: f64,
    pub seed: u64,
}

fn uniform_degrees(n: usize, nnz: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let base = nnz / n;
    let mut degrees = vec![base; n];
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    for &r in &rows[..nnz % n] {
        degrees[r] += 1;
    }
    degrees
}

/// Deterministic quantiles of a Pareto law scaled so the capped degrees sum
/// to `nnz`, then rounded by largest remainder.
fn power_law_degrees(n: usize, nnz: usize, exponent: f64) -> Vec<usize> {
    let shape = 1.0 / (exponent - 1.0);
    let quantiles: Vec<f64> = (0..n).map(|i| (1.0 - (i as f64 + 0.5) / n as f64).powf(-shape)).collect();
    let cap = n as f64;
    let total = |scale: f64| quantiles.iter().map(|q| (scale * q).min(cap)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, cap);
    while total(hi) < nnz as f64 && hi < 1e18 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < nnz as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let real: Vec<f64> = quantiles.iter().map(|q| (hi * q).min(cap)).collect();
    let mut degrees: Vec<usize> = real.iter().map(|r| r.floor() as usize).collect();
    let mut assigned: usize = degrees.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (real[b] - real[b].floor()).total_cmp(&(real[a] - real[a].floor())).then(a.cmp(&b)));
    let mut k = 0;
    while assigned < nnz {
        let r = order[k % n];
        if degrees[r] < n {
            degrees[r] += 1;
            assigned += 1;
        }
        k += 1;
    }
    while assigned > nnz {
        let r = order[n - 1 - (k % n)];
        if degrees[r] > 0 {
            degrees[r] -= 1;
            assigned -= 1;
        }
        k += 1;
    }
    degrees
}

/// Builds an `n x n` matrix with exactly `spec.nnz` entries; column
/// positions are distinct random picks and values lie in `[0.5, 1.5)`.
pub fn generate_synthetic<T: Scalar>(spec: &SynthSpec) -> Result<DualMatrix<T>> {
    let n = spec.n;
    if n == 0 {
        return invalid("synthetic matrix needs n >= 1");
    }
    if spec.nnz as u128 > (n as u128) * (n as u128) {
        return invalid(format!("{} nonzeros do not fit in a {n}x{n} matrix", spec.nnz));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let degrees = match spec.kind {
        SynthKind::UniformDegree => uniform_degrees(n, spec.nnz, &mut rng),
        SynthKind::PowerLaw => {
            if !(spec.exponent > 1.0) || !spec.exponent.is_finite() {
                return invalid("power-law exponent must be finite and greater than 1");
            }
            let mut d = power_law_degrees(n, spec.nnz, spec.exponent);
            d.shuffle(&mut rng);
            d
        }
    };
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut cols = Vec::with_capacity(spec.nnz);
    let mut vals = Vec::with_capacity(spec.nnz);
    for &d in &degrees {
        let mut picked = rand::seq::index::sample(&mut rng, n, d).into_vec();
        picked.sort_unstable();
        for c in picked {
            cols.push(c);
            vals.push(T::from_f64_lossy(rng.gen_range(0.5..1.5)));
        }
        offsets.push(cols.len());
    }
    Ok(DualMatrix::from_csr(CsrMatrix::new(n, n, offsets, cols, vals)?))
}
