//! Hyper-parameter search with k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::features::{FeatureMask, FeatureVector};
use crate::selector::tree::{ClassWeight, DecisionTree, Target, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub max_depth: usize,
    pub class_weight: ClassWeight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid {
    pub depths: Vec<usize>,
    pub class_weights: Vec<ClassWeight>,
    pub folds: usize,
    pub seed: u64,
    pub cost_lambda: f64,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            depths: (1..=10).collect(),
            class_weights: vec![ClassWeight::Uniform, ClassWeight::Balanced],
            folds: 5,
            seed: 0,
            cost_lambda: 0.0,
        }
    }
}

impl SearchGrid {
    /// Grid points in evaluation order, which is also the tie-break order.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut depths = self.depths.clone();
        depths.sort_unstable();
        depths.dedup();
        let mut weights = self.class_weights.clone();
        weights.sort_by_key(|w| *w as u8);
        weights.dedup();
        depths.iter().flat_map(|&d| weights.iter().map(move |&w| GridPoint { max_depth: d, class_weight: w })).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridScore {
    pub point: GridPoint,
    /// Held-out predictions that matched, summed over folds.
    pub correct: usize,
    pub total: usize,
}

impl GridScore {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Refit on every sample with the winning grid point.
    pub tree: DecisionTree,
    pub best: GridPoint,
    pub scores: Vec<GridScore>,
}

/// Fold id of each sample after a seeded shuffle.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for f in 0..folds {
        for &i in &order[f * n / folds..(f + 1) * n / folds] {
            fold[i] = f;
        }
    }
    fold
}

/// Scores every grid point by k-fold cross-validation and refits the best.
/// Equal scores favour the shallower tree, then uniform weighting.
pub fn grid_search(
    target: Target,
    rows: &[FeatureVector],
    labels: &[usize],
    mask: FeatureMask,
    grid: &SearchGrid,
) -> Result<SearchOutcome> {
    let points = grid.points();
    if points.is_empty() {
        return invalid("search grid is empty");
    }
    if rows.is_empty() {
        return invalid("cannot search on an empty sample set");
    }
    if grid.folds < 2 {
        return invalid("cross-validation needs at least two folds");
    }
    let k = grid.folds.min(rows.len());
    let fold = fold_assignment(rows.len(), k, grid.seed);
    let mut scores = Vec::with_capacity(points.len());
    for &point in &points {
        let params = TreeParams::new(point.max_depth, point.class_weight).with_cost_lambda(grid.cost_lambda);
        let mut correct = 0;
        let mut total = 0;
        if k >= 2 {
            for f in 0..k {
                let (mut tr_x, mut tr_y, mut te_x, mut te_y) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
                for i in 0..rows.len() {
                    if fold[i] == f {
                        te_x.push(rows[i]);
                        te_y.push(labels[i]);
                    } else {
                        tr_x.push(rows[i]);
                        tr_y.push(labels[i]);
                    }
                }
                let tree = DecisionTree::fit(target, &tr_x, &tr_y, mask, params)?;
                correct += tree.correct(&te_x, &te_y);
                total += te_x.len();
            }
        }
        scores.push(GridScore { point, correct, total });
    }
    let mut best = scores[0];
    for s in &scores[1..] {
        if s.correct > best.correct {
            best = *s;
        }
    }
    let params = TreeParams::new(best.point.max_depth, best.point.class_weight).with_cost_lambda(grid.cost_lambda);
    let mut tree = DecisionTree::fit(target, rows, labels, mask, params)?;
    tree.metadata.cv_accuracy = Some(best.accuracy());
    Ok(SearchOutcome { tree, best: best.point, scores })
}
