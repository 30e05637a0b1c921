use std::ops::Range;

use crate::error::{invalid, Result};

/// One worker's share of a nonzero-balanced split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkerRange {
    /// Half-open range of work items (nonzeros).
    pub items: Range<usize>,
    /// Lanes (rows or columns) containing those items; empty when `items` is.
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkPartition {
    pub ranges: Vec<WorkerRange>,
}

impl WorkPartition {
    pub fn workers(&self) -> usize {
        self.ranges.len()
    }
}

/// Lane that holds item `item`: the last lane whose offset is `<= item`.
#[inline]
pub(crate) fn lane_of(offsets: &[usize], item: usize) -> usize {
    offsets.partition_point(|&o| o <= item) - 1
}

/// Splits `total_items` evenly: worker `w` owns `[w*T/W, (w+1)*T/W)`; the
/// covering lanes are located by binary search over `offsets`.
pub fn make_partition(offsets: &[usize], total_items: usize, workers: usize) -> Result<WorkPartition> {
    if workers == 0 {
        return invalid("partition needs at least one worker");
    }
    if offsets.last() != Some(&total_items) || offsets.first() != Some(&0) {
        return invalid("offsets must run from 0 to the item total");
    }
    let ranges = (0..workers)
        .map(|w| {
            let start = w * total_items / workers;
            let end = (w + 1) * total_items / workers;
            let span = if start == end { 0..0 } else { lane_of(offsets, start)..lane_of(offsets, end - 1) + 1 };
            WorkerRange { items: start..end, span }
        })
        .collect();
    Ok(WorkPartition { ranges })
}
