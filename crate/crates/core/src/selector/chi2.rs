//! Chi-squared feature ranking.

use crate::error::{invalid, Result};
use crate::features::{Feature, FeatureMask, FeatureVector};

/// Chi-squared statistic of each masked feature against the class labels.
///
/// Features are treated as nonnegative masses: the observed value for class
/// `k` is the feature total over samples of `k`, the expected value is that
/// total scaled by the class frequency. A feature whose total is zero scores 0.
pub fn chi2_scores(
    rows: &[FeatureVector],
    labels: &[usize],
    n_classes: usize,
    mask: FeatureMask,
) -> Result<Vec<(Feature, f64)>> {
    if rows.is_empty() || rows.len() != labels.len() {
        return invalid("chi-squared ranking needs a non-empty, labelled sample set");
    }
    if labels.iter().any(|&l| l >= n_classes) {
        return invalid("label out of range");
    }
    let mut class_count = vec![0usize; n_classes];
    for &l in labels {
        class_count[l] += 1;
    }
    let n = rows.len() as f64;
    let mut scores = Vec::new();
    for f in mask.features() {
        if rows.iter().any(|r| r[f] < 0.0 || !r[f].is_finite()) {
            return invalid(format!("feature {} has negative or non-finite values", f.name()));
        }
        let mut observed = vec![0.0; n_classes];
        for (r, &l) in rows.iter().zip(labels) {
            observed[l] += r[f];
        }
        let total: f64 = observed.iter().sum();
        let score = if total == 0.0 {
            0.0
        } else {
            observed
                .iter()
                .zip(&class_count)
                .filter(|(_, &c)| c > 0)
                .map(|(&o, &c)| {
                    let e = total * c as f64 / n;
                    (o - e) * (o - e) / e
                })
                .sum()
        };
        scores.push((f, score));
    }
    Ok(scores)
}

/// Masked features ordered by descending score; equal scores keep id order.
pub fn chi2_rank(
    rows: &[FeatureVector],
    labels: &[usize],
    n_classes: usize,
    mask: FeatureMask,
) -> Result<Vec<(Feature, f64)>> {
    let mut scores = chi2_scores(rows, labels, n_classes, mask)?;
    scores.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(scores)
}
