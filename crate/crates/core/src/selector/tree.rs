//! CART classification trees over the selector features.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::features::{Feature, FeatureMask, FeatureVector};

/// Which selection decision a tree makes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Pattern,
    Workload,
    Writeback,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Pattern, Target::Workload, Target::Writeback];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn n_classes(self) -> usize {
        match self {
            Target::Pattern => 3,
            Target::Workload | Target::Writeback => 2,
        }
    }

    /// Features the model may split on.
    pub fn mask(self) -> FeatureMask {
        match self {
            Target::Pattern => FeatureMask::PATTERN,
            Target::Workload => FeatureMask::WORKLOAD,
            Target::Writeback => FeatureMask::WRITEBACK,
        }
    }

    pub fn class_names(self) -> &'static [&'static str] {
        match self {
            Target::Pattern => &["col", "row", "spmv"],
            Target::Workload => &["direct", "lb"],
            Target::Writeback => &["atomic", "sort"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Pattern => "pattern",
            Target::Workload => "workload",
            Target::Writeback => "writeback",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeight {
    #[default]
    Uniform,
    /// Each class weighted by `total / (classes * count_k)`.
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub class_weight: ClassWeight,
    pub min_samples_split: usize,
    /// Penalty per feature-cost rank added to the split criterion.
    pub cost_lambda: f64,
}

impl TreeParams {
    pub fn new(max_depth: usize, class_weight: ClassWeight) -> Self {
        Self { max_depth, class_weight, min_samples_split: 2, cost_lambda: 0.0 }
    }

    pub fn with_cost_lambda(mut self, lambda: f64) -> Self {
        self.cost_lambda = lambda;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    /// `value <= threshold` routes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeMetadata {
    pub max_depth: usize,
    pub class_weight: ClassWeight,
    pub cost_lambda: f64,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub cv_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub target: Target,
    pub mask: FeatureMask,
    pub nodes: Vec<Node>,
    pub metadata: TreeMetadata,
}

/// `1 - sum p_k^2` over weighted class counts.
pub fn gini_impurity(class_counts: &[f64]) -> Result<f64> {
    let total: f64 = class_counts.iter().sum();
    if class_counts.iter().any(|&c| c < 0.0) || total <= 0.0 {
        return invalid("gini impurity needs nonnegative counts with a positive total");
    }
    Ok(impurity(class_counts, total))
}

#[inline]
fn impurity(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c / total) * (c / total)).sum::<f64>()
}

/// Per-class weights for a label set.
pub fn class_weights(labels: &[usize], n_classes: usize, mode: ClassWeight) -> Vec<f64> {
    match mode {
        ClassWeight::Uniform => vec![1.0; n_classes],
        ClassWeight::Balanced => {
            let mut counts = vec![0usize; n_classes];
            for &l in labels {
                counts[l] += 1;
            }
            let present = counts.iter().filter(|&&c| c > 0).count().max(1);
            counts
                .iter()
                .map(|&c| if c == 0 { 0.0 } else { labels.len() as f64 / (present as f64 * c as f64) })
                .collect()
        }
    }
}

struct Builder<'a> {
    rows: &'a [FeatureVector],
    labels: &'a [usize],
    weights: Vec<f64>,
    n_classes: usize,
    features: Vec<Feature>,
    params: TreeParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: Feature,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn class_mass(&self, idx: &[usize]) -> Vec<f64> {
        let mut mass = vec![0.0; self.n_classes];
        for &i in idx {
            mass[self.labels[i]] += self.weights[self.labels[i]];
        }
        mass
    }

    fn majority(mass: &[f64]) -> usize {
        let mut best = 0;
        for (k, &m) in mass.iter().enumerate() {
            if m > mass[best] {
                best = k;
            }
        }
        best
    }

    fn find_split(&self, idx: &[usize], mass: &[f64]) -> Option<BestSplit> {
        let total: f64 = mass.iter().sum();
        let mut best: Option<BestSplit> = None;
        let mut order = idx.to_vec();
        for &f in &self.features {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            let mut left = vec![0.0; self.n_classes];
            let mut left_total = 0.0;
            let penalty = self.params.cost_lambda * f.cost() as usize as f64;
            for pos in 0..order.len() - 1 {
                let i = order[pos];
                let w = self.weights[self.labels[i]];
                left[self.labels[i]] += w;
                left_total += w;
                let here = self.rows[i][f];
                let next = self.rows[order[pos + 1]][f];
                if here >= next {
                    continue;
                }
                let right: Vec<f64> = mass.iter().zip(&left).map(|(t, l)| t - l).collect();
                let right_total = total - left_total;
                let score = (left_total * impurity(&left, left_total) + right_total * impurity(&right, right_total))
                    / total
                    + penalty;
                if best.as_ref().map_or(true, |b| score < b.score) {
                    let mut threshold = here + (next - here) / 2.0;
                    if threshold >= next || !threshold.is_finite() {
                        threshold = here;
                    }
                    best = Some(BestSplit { feature: f, threshold, score });
                }
            }
        }
        best
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let me = self.nodes.len();
        let mass = self.class_mass(&idx);
        let leaf = Node::Leaf { leaf: Self::majority(&mass) };
        self.nodes.push(leaf);
        let pure = mass.iter().filter(|&&m| m > 0.0).count() <= 1;
        if depth >= self.params.max_depth || pure || idx.len() < self.params.min_samples_split.max(2) {
            return me;
        }
        let Some(split) = self.find_split(&idx, &mass) else {
            return me;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.rows[i][split.feature] <= split.threshold);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[me] = Node::Split { feature: split.feature.index(), threshold: split.threshold, left, right };
        me
    }
}

impl DecisionTree {
    /// Greedy CART fit: at each node the masked feature and midpoint
    /// threshold minimizing weighted child Gini impurity (plus the optional
    /// cost penalty) wins; ties go to the lower feature id, then the lower
    /// threshold.
    pub fn fit(
        target: Target,
        rows: &[FeatureVector],
        labels: &[usize],
        mask: FeatureMask,
        params: TreeParams,
    ) -> Result<Self> {
        if rows.is_empty() {
            return invalid("cannot train a tree on an empty sample set");
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), found: labels.len() });
        }
        let n_classes = target.n_classes();
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return invalid(format!("label {bad} out of range for {} classes", n_classes));
        }
        let weights = class_weights(labels, n_classes, params.class_weight);
        let mut builder = Builder {
            rows,
            labels,
            weights,
            n_classes,
            features: mask.features().collect(),
            params,
            nodes: Vec::new(),
        };
        builder.build((0..rows.len()).collect(), 0);
        let mut tree = DecisionTree {
            target,
            mask,
            nodes: builder.nodes,
            metadata: TreeMetadata {
                max_depth: params.max_depth,
                class_weight: params.class_weight,
                cost_lambda: params.cost_lambda,
                train_accuracy: None,
                test_accuracy: None,
                cv_accuracy: None,
            },
        };
        tree.metadata.train_accuracy = Some(tree.accuracy(rows, labels));
        Ok(tree)
    }

    /// A single-leaf tree that always answers `class`.
    pub fn constant(target: Target, class: usize) -> Result<Self> {
        Self::from_nodes(target, target.mask(), vec![Node::Leaf { leaf: class }])
    }

    /// Builds a tree from explicit nodes after structural validation.
    pub fn from_nodes(target: Target, mask: FeatureMask, nodes: Vec<Node>) -> Result<Self> {
        let tree = DecisionTree {
            target,
            mask,
            metadata: TreeMetadata {
                max_depth: 0,
                class_weight: ClassWeight::Uniform,
                cost_lambda: 0.0,
                train_accuracy: None,
                test_accuracy: None,
                cv_accuracy: None,
            },
            nodes,
        };
        tree.validate()?;
        let depth = tree.depth();
        Ok(DecisionTree { metadata: TreeMetadata { max_depth: depth, ..tree.metadata.clone() }, ..tree })
    }

    /// Checks the single-root, acyclic, in-mask, in-range structure.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Model("tree has no nodes".into()));
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { leaf } => {
                    if leaf >= self.target.n_classes() {
                        return Err(Error::Model(format!("node {i}: class {leaf} out of range")));
                    }
                }
                Node::Split { feature, threshold, left, right } => {
                    let f = Feature::from_index(feature)
                        .ok_or_else(|| Error::Model(format!("node {i}: unknown feature {feature}")))?;
                    if !self.mask.contains(f) {
                        return Err(Error::Model(format!("node {i}: feature {} outside the model mask", f.name())));
                    }
                    if threshold.is_nan() {
                        return Err(Error::Model(format!("node {i}: NaN threshold")));
                    }
                    for child in [left, right] {
                        // children always follow their parent, which rules out cycles
                        if child <= i || child >= self.nodes.len() {
                            return Err(Error::Model(format!("node {i}: bad child index {child}")));
                        }
                        parents[child] += 1;
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::Model("tree nodes do not form a single rooted tree".into()));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Routes with features fetched on demand.
    pub fn predict_with(&self, mut feature: impl FnMut(Feature) -> f64) -> usize {
        self.leaf_with(&mut feature).1
    }

    /// Index of the leaf reached and its class.
    pub fn leaf_with(&self, mut feature: impl FnMut(Feature) -> f64) -> (usize, usize) {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { leaf } => return (i, leaf),
                Node::Split { feature: f, threshold, left, right } => {
                    let f = Feature::from_index(f).expect("validated feature id");
                    i = if feature(f) <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> usize {
        self.predict_with(|f| x[f])
    }

    pub fn accuracy(&self, rows: &[FeatureVector], labels: &[usize]) -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        self.correct(rows, labels) as f64 / rows.len() as f64
    }

    pub fn correct(&self, rows: &[FeatureVector], labels: &[usize]) -> usize {
        rows.iter().zip(labels).filter(|(x, &y)| self.predict(x) == y).count()
    }

    /// Features referenced by any split.
    pub fn used_features(&self) -> FeatureMask {
        let used: Vec<Feature> = self
            .nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Split { feature, .. } => Feature::from_index(feature),
                Node::Leaf { .. } => None,
            })
            .collect();
        FeatureMask::from_features(&used)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FEATURE_COUNT;
    use proptest::prelude::*;

    fn fv(pairs: &[(Feature, f64)]) -> FeatureVector {
        let mut v = [0.0; FEATURE_COUNT];
        for &(f, x) in pairs {
            v[f.index()] = x;
        }
        FeatureVector(v)
    }

    #[test]
    fn impurity_values() {
        assert_eq!(gini_impurity(&[10.0, 0.0]).unwrap(), 0.0);
        assert_eq!(gini_impurity(&[5.0, 5.0]).unwrap(), 0.5);
        assert_eq!(gini_impurity(&[1.0, 3.0]).unwrap(), 0.375);
        assert!(gini_impurity(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn separable_one_dimensional() {
        let xs = [0.05, 0.1, 0.2, 0.25, 0.4, 0.6, 0.9];
        let rows: Vec<_> = xs.iter().map(|&x| fv(&[(Feature::XSparsity, x)])).collect();
        let labels: Vec<usize> = xs.iter().map(|&x| usize::from(x > 0.3)).collect();
        let tree = DecisionTree::fit(
            Target::Workload,
            &rows,
            &labels,
            FeatureMask::from_features(&[Feature::XSparsity]),
            TreeParams::new(5, ClassWeight::Uniform),
        )
        .unwrap();
        assert_eq!(tree.depth(), 1);
        let Node::Split { threshold, .. } = tree.nodes[0] else { panic!("root should split") };
        assert!(threshold > 0.25 && threshold < 0.4);
        assert_eq!(tree.metadata.train_accuracy, Some(1.0));
    }

    #[test]
    fn single_class_is_a_leaf() {
        let rows = vec![fv(&[(Feature::Rows, 1.0)]), fv(&[(Feature::Rows, 2.0)])];
        let tree = DecisionTree::fit(
            Target::Pattern,
            &rows,
            &[2, 2],
            FeatureMask::ALL,
            TreeParams::new(4, ClassWeight::Balanced),
        )
        .unwrap();
        assert_eq!(tree.nodes, vec![Node::Leaf { leaf: 2 }]);
    }

    #[test]
    fn empty_set_rejected() {
        assert!(DecisionTree::fit(
            Target::Pattern,
            &[],
            &[],
            FeatureMask::ALL,
            TreeParams::new(3, ClassWeight::Uniform)
        )
        .is_err());
    }

    fn xor_set() -> (Vec<FeatureVector>, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            for _ in 0..5 {
                rows.push(fv(&[(Feature::Rows, a), (Feature::Cols, b)]));
                labels.push(usize::from(a != b));
            }
        }
        (rows, labels)
    }

    #[test]
    fn xor_needs_depth_two() {
        let (rows, labels) = xor_set();
        let mask = FeatureMask::from_features(&[Feature::Rows, Feature::Cols]);
        let deep = DecisionTree::fit(Target::Workload, &rows, &labels, mask, TreeParams::new(2, ClassWeight::Uniform))
            .unwrap();
        assert_eq!(deep.accuracy(&rows, &labels), 1.0);

        // exhaustive depth-1 oracle: every feature, every threshold, every leaf labelling
        let mut best = 0.0f64;
        for f in [Feature::Rows, Feature::Cols] {
            for t in [-0.5, 0.5, 1.5] {
                for (l, r) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let hits = rows.iter().zip(&labels).filter(|(x, &y)| (if x[f] <= t { l } else { r }) == y).count();
                    best = best.max(hits as f64 / rows.len() as f64);
                }
            }
        }
        assert!(best <= 0.75);
        let stump = DecisionTree::fit(Target::Workload, &rows, &labels, mask, TreeParams::new(1, ClassWeight::Uniform))
            .unwrap();
        assert!(stump.accuracy(&rows, &labels) <= best);
    }

    #[test]
    fn splits_stay_inside_mask() {
        let (rows, labels) = xor_set();
        let tree = DecisionTree::fit(
            Target::Writeback,
            &rows,
            &labels,
            FeatureMask::WRITEBACK,
            TreeParams::new(10, ClassWeight::Uniform),
        )
        .unwrap();
        for f in tree.used_features().features() {
            assert!(FeatureMask::WRITEBACK.contains(f));
        }
    }

    #[test]
    fn cost_penalty_prefers_cheap_features() {
        // Gini (expensive) separates perfectly, n (cheap) misclassifies one sample.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let y = usize::from(i >= 10);
            let cols = if i == 9 { 100.0 } else { i as f64 * 10.0 };
            rows.push(fv(&[(Feature::Gini, y as f64), (Feature::Cols, cols)]));
            labels.push(y);
        }
        let mask = FeatureMask::from_features(&[Feature::Cols, Feature::Gini]);
        let plain =
            DecisionTree::fit(Target::Pattern, &rows, &labels, mask, TreeParams::new(1, ClassWeight::Uniform)).unwrap();
        assert!(plain.used_features().contains(Feature::Gini));
        let cheap = DecisionTree::fit(
            Target::Pattern,
            &rows,
            &labels,
            mask,
            TreeParams::new(1, ClassWeight::Uniform).with_cost_lambda(0.1),
        )
        .unwrap();
        assert_eq!(cheap.used_features(), FeatureMask::from_features(&[Feature::Cols]));
    }

    #[test]
    fn validation_rejects_bad_structure() {
        let mask = FeatureMask::WORKLOAD;
        let cyc = vec![Node::Split { feature: 0, threshold: 1.0, left: 0, right: 1 }, Node::Leaf { leaf: 0 }];
        assert!(DecisionTree::from_nodes(Target::Workload, mask, cyc).is_err());
        let outside = vec![
            Node::Split { feature: 10, threshold: 1.0, left: 1, right: 2 },
            Node::Leaf { leaf: 0 },
            Node::Leaf { leaf: 1 },
        ];
        assert!(DecisionTree::from_nodes(Target::Workload, mask, outside).is_err());
        assert!(DecisionTree::from_nodes(Target::Workload, mask, vec![Node::Leaf { leaf: 2 }]).is_err());
    }

    fn dataset_strategy() -> impl Strategy<Value = (Vec<(f64, f64, f64)>, Vec<usize>)> {
        (5usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec((0.0f64..100.0, 0.0f64..1.0, 1.0f64..50.0), n),
                proptest::collection::vec(0usize..3, n),
            )
        })
    }

    fn rows_of(raw: &[(f64, f64, f64)]) -> Vec<FeatureVector> {
        raw.iter().map(|&(a, b, c)| fv(&[(Feature::Nnz, a), (Feature::XSparsity, b), (Feature::AvgRow, c)])).collect()
    }

    proptest! {
        #[test]
        fn duplicated_uniform_data_gives_same_tree((raw, labels) in dataset_strategy(), depth in 1usize..6) {
            let rows = rows_of(&raw);
            let params = TreeParams::new(depth, ClassWeight::Uniform);
            let once = DecisionTree::fit(Target::Pattern, &rows, &labels, FeatureMask::ALL, params).unwrap();
            let rows2: Vec<_> = rows.iter().chain(&rows).copied().collect();
            let labels2: Vec<_> = labels.iter().chain(&labels).copied().collect();
            let twice = DecisionTree::fit(Target::Pattern, &rows2, &labels2, FeatureMask::ALL, params).unwrap();
            prop_assert_eq!(once.nodes, twice.nodes);
        }

        #[test]
        fn monotone_rescaling_keeps_leaf_partition((raw, labels) in dataset_strategy(), depth in 1usize..6) {
            let rows = rows_of(&raw);
            let scaled: Vec<_> = rows
                .iter()
                .map(|r| {
                    let mut r = *r;
                    r.0[Feature::Nnz.index()] = (r.0[Feature::Nnz.index()] * 3.0 + 1.0).ln();
                    r
                })
                .collect();
            let params = TreeParams::new(depth, ClassWeight::Uniform);
            let a = DecisionTree::fit(Target::Pattern, &rows, &labels, FeatureMask::ALL, params).unwrap();
            let b = DecisionTree::fit(Target::Pattern, &scaled, &labels, FeatureMask::ALL, params).unwrap();
            let leaves_a: Vec<usize> = rows.iter().map(|r| a.leaf_with(|f| r[f]).0).collect();
            let leaves_b: Vec<usize> = scaled.iter().map(|r| b.leaf_with(|f| r[f]).0).collect();
            prop_assert_eq!(leaves_a, leaves_b);
        }

        #[test]
        fn depth_bounded_and_deterministic((raw, labels) in dataset_strategy(), depth in 1usize..11) {
            let rows = rows_of(&raw);
            let params = TreeParams::new(depth, ClassWeight::Balanced);
            let t = DecisionTree::fit(Target::Pattern, &rows, &labels, FeatureMask::ALL, params).unwrap();
            prop_assert!(t.depth() <= depth);
            t.validate().unwrap();
            for r in &rows {
                prop_assert_eq!(t.predict(r), t.predict(r));
            }
        }
    }
}
