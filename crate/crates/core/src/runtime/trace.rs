//! Trace replay and aggregate statistics.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::kernels::{KernelId, MultiplyOutput};
use crate::runtime::executor::{AdaptiveExecutor, InputVector, IterationReport};
use crate::scalar::Scalar;

/// Per-iteration timings of all eight kernels, indexed by kernel id.
pub type TimingTable = Vec<[f64; 8]>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceStats {
    pub reports: Vec<IterationReport>,
    /// `sum(feature + predict + convert) / sum(total)`; 0 for an empty trace.
    pub overhead_fraction: f64,
    pub switches: usize,
    pub conversions: usize,
    /// Chosen-kernel time over oracle time, when a timing table was given.
    pub regret: Option<f64>,
}

impl TraceStats {
    pub fn from_reports(reports: Vec<IterationReport>) -> Self {
        let overhead: f64 = reports.iter().map(IterationReport::overhead_s).sum();
        let total: f64 = reports.iter().map(IterationReport::total_s).sum();
        let switches = reports.windows(2).filter(|w| w[0].kernel != w[1].kernel).count();
        let conversions = reports.iter().filter(|r| r.converted).count();
        TraceStats {
            overhead_fraction: if total > 0.0 { overhead / total } else { 0.0 },
            switches,
            conversions,
            regret: None,
            reports,
        }
    }

    pub fn kernels(&self) -> Vec<KernelId> {
        self.reports.iter().map(|r| r.kernel).collect()
    }

    pub fn kernel_seconds(&self) -> f64 {
        self.reports.iter().map(|r| r.kernel_s).sum()
    }

    /// Attaches regret against `table`, which must cover every iteration.
    pub fn with_oracle(mut self, table: &[[f64; 8]]) -> Result<Self> {
        self.regret = Some(regret(&self.kernels(), table)?);
        Ok(self)
    }
}

/// `sum(table[i][chosen_i]) / sum(min_k table[i][k])`.
pub fn regret(chosen: &[KernelId], table: &[[f64; 8]]) -> Result<f64> {
    if chosen.len() != table.len() {
        return Err(Error::DimensionMismatch { expected: chosen.len(), found: table.len() });
    }
    let picked: f64 = chosen.iter().zip(table).map(|(k, row)| row[k.index()]).sum();
    let best: f64 = table.iter().map(|row| row.iter().copied().fold(f64::INFINITY, f64::min)).sum();
    Ok(if best > 0.0 { picked / best } else { 1.0 })
}

/// Total time of each kernel run on every iteration of the table.
pub fn fixed_kernel_totals(table: &[[f64; 8]]) -> [f64; 8] {
    let mut totals = [0.0; 8];
    for row in table {
        for (t, v) in totals.iter_mut().zip(row) {
            *t += v;
        }
    }
    totals
}

/// Runs every vector through `exec`, handing each output to `visit`.
pub fn run_trace_with<T, I, F>(
    exec: &mut AdaptiveExecutor<T>,
    xs: I,
    oracle: Option<&[[f64; 8]]>,
    mut visit: F,
) -> Result<TraceStats>
where
    T: Scalar,
    I: IntoIterator,
    I::Item: Into<InputVector<T>>,
    F: FnMut(usize, &MultiplyOutput<T>),
{
    let mut reports = Vec::new();
    for (i, x) in xs.into_iter().enumerate() {
        let it = exec.execute_iteration(x)?;
        visit(i, &it.output);
        reports.push(it.report);
    }
    let stats = TraceStats::from_reports(reports);
    match oracle {
        Some(table) => stats.with_oracle(table),
        None => Ok(stats),
    }
}

pub fn run_trace<T, I>(exec: &mut AdaptiveExecutor<T>, xs: I, oracle: Option<&[[f64; 8]]>) -> Result<TraceStats>
where
    T: Scalar,
    I: IntoIterator,
    I::Item: Into<InputVector<T>>,
{
    run_trace_with(exec, xs, oracle, |_, _| {})
}

pub fn write_stats_csv<W: Write>(out: W, stats: &TraceStats) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "nnz_x", "kernel", "feature_s", "predict_s", "convert_s", "kernel_s"])?;
    for (i, r) in stats.reports.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.nnz_x.to_string(),
            r.kernel.name().to_string(),
            format!("{:e}", r.feature_s),
            format!("{:e}", r.predict_s),
            format!("{:e}", r.convert_s),
            format!("{:e}", r.kernel_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One line: iterations, switches, conversions, overhead and regret.
pub fn summary_line(stats: &TraceStats) -> String {
    let mut s = format!(
        "iterations={} switches={} conversions={} overhead={:.4} kernel_s={:.3e}",
        stats.reports.len(),
        stats.switches,
        stats.conversions,
        stats.overhead_fraction,
        stats.kernel_seconds()
    );
    if let Some(r) = stats.regret {
        s.push_str(&format!(" regret={r:.4}"));
    }
    s
}

pub fn write_timing_table<W: Write>(out: W, table: &[[f64; 8]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iter".to_string()];
    header.extend(KernelId::ALL.iter().map(|k| k.name().to_string()));
    w.write_record(&header)?;
    for (i, row) in table.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_timing_table<R: Read>(input: R) -> Result<TimingTable> {
    let mut r = csv::Reader::from_reader(input);
    let mut table = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 9 {
            return Err(Error::Parse { line: i + 2, message: format!("expected 9 columns, found {}", rec.len()) });
        }
        let mut row = [0.0; 8];
        for (k, v) in row.iter_mut().enumerate() {
            *v = rec[k + 1]
                .parse()
                .map_err(|e| Error::Parse { line: i + 2, message: format!("timing column {}: {e}", k + 1) })?;
        }
        table.push(row);
    }
    Ok(table)
}
