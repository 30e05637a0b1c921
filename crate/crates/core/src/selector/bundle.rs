//! The three-tree selector, its training entry point and its model file.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{Feature, FeatureMask, LazyFeatureContext};
use crate::kernels::{KernelId, Pattern, Workload, Writeback};
use crate::scalar::Scalar;
use crate::selector::dataset::{design, TrainingSample};
use crate::selector::search::{grid_search, SearchGrid};
use crate::selector::tree::{ClassWeight, DecisionTree, Node, Target, TreeMetadata};

pub const SCHEMA_VERSION: u32 = 1;

/// SHA-256 of the comma-joined feature names, in id order.
pub fn feature_order_hash() -> String {
    hex::encode(Sha256::digest(Feature::ALL.map(Feature::name).join(",").as_bytes()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorBundle {
    pub pattern: DecisionTree,
    pub workload: DecisionTree,
    pub writeback: DecisionTree,
    pub hardware_tag: String,
    pub metadata: BTreeMap<String, String>,
}

impl SelectorBundle {
    pub fn new(pattern: DecisionTree, workload: DecisionTree, writeback: DecisionTree) -> Result<Self> {
        for (tree, target) in
            [(&pattern, Target::Pattern), (&workload, Target::Workload), (&writeback, Target::Writeback)]
        {
            if tree.target != target {
                return Err(Error::Model(format!("expected a {} tree, got {}", target.name(), tree.target.name())));
            }
            tree.validate()?;
        }
        Ok(SelectorBundle { pattern, workload, writeback, hardware_tag: String::new(), metadata: BTreeMap::new() })
    }

    /// A bundle whose trees always answer `kernel`.
    pub fn constant(kernel: KernelId) -> Self {
        let wb = kernel.writeback().unwrap_or(Writeback::Atomic);
        SelectorBundle::new(
            DecisionTree::constant(Target::Pattern, kernel.pattern().index()).expect("valid class"),
            DecisionTree::constant(Target::Workload, kernel.workload().index()).expect("valid class"),
            DecisionTree::constant(Target::Writeback, wb.index()).expect("valid class"),
        )
        .expect("constant trees are valid")
    }

    pub fn tree(&self, target: Target) -> &DecisionTree {
        match target {
            Target::Pattern => &self.pattern,
            Target::Workload => &self.workload,
            Target::Writeback => &self.writeback,
        }
    }

    /// Evaluates the pattern tree, then the workload tree, then the
    /// write-back tree when a column kernel was picked. Features are pulled
    /// from `ctx` only along the taken paths.
    pub fn predict_kernel<T: Scalar>(&self, ctx: &mut LazyFeatureContext<'_, T>) -> KernelId {
        ctx.note_tree(Target::Pattern.index());
        let pattern = Pattern::from_index(self.pattern.predict_with(|f| ctx.get(f))).expect("validated class");
        ctx.note_tree(Target::Workload.index());
        let workload = Workload::from_index(self.workload.predict_with(|f| ctx.get(f))).expect("validated class");
        let writeback = if pattern == Pattern::ColSpMSpV {
            ctx.note_tree(Target::Writeback.index());
            Some(Writeback::from_index(self.writeback.predict_with(|f| ctx.get(f))).expect("validated class"))
        } else {
            None
        };
        KernelId::from_parts(pattern, workload, writeback).expect("consistent parts")
    }

    /// Same cascade over a fully computed feature row.
    pub fn predict_from(&self, x: &crate::features::FeatureVector) -> KernelId {
        let pattern = Pattern::from_index(self.pattern.predict(x)).expect("validated class");
        let workload = Workload::from_index(self.workload.predict(x)).expect("validated class");
        let writeback = (pattern == Pattern::ColSpMSpV)
            .then(|| Writeback::from_index(self.writeback.predict(x)).expect("validated class"));
        KernelId::from_parts(pattern, workload, writeback).expect("consistent parts")
    }
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub grid: SearchGrid,
    /// Feature subset per target, indexed by [`Target::index`].
    pub masks: [FeatureMask; 3],
    pub hardware_tag: String,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { grid: SearchGrid::default(), masks: Target::ALL.map(Target::mask), hardware_tag: String::new() }
    }
}

/// Grid-searches one tree per target on `train` and records held-out
/// accuracy on `test` when it is non-empty.
pub fn train_selector(
    train: &[TrainingSample],
    test: &[TrainingSample],
    opts: &TrainOptions,
) -> Result<SelectorBundle> {
    let mut trees = Vec::with_capacity(3);
    for target in Target::ALL {
        let (x, y) = design(train, target);
        let mut tree = grid_search(target, &x, &y, opts.masks[target.index()], &opts.grid)?.tree;
        if !test.is_empty() {
            let (tx, ty) = design(test, target);
            tree.metadata.test_accuracy = Some(tree.accuracy(&tx, &ty));
        }
        trees.push(tree);
    }
    let writeback = trees.pop().expect("three trees");
    let workload = trees.pop().expect("three trees");
    let pattern = trees.pop().expect("three trees");
    let mut bundle = SelectorBundle::new(pattern, workload, writeback)?;
    bundle.hardware_tag = opts.hardware_tag.clone();
    bundle.metadata.insert("train_samples".into(), train.len().to_string());
    bundle.metadata.insert("test_samples".into(), test.len().to_string());
    bundle.metadata.insert("cv_folds".into(), opts.grid.folds.to_string());
    bundle.metadata.insert("cv_seed".into(), opts.grid.seed.to_string());
    bundle.metadata.insert("workload_labels".into(), "pooled over all patterns".into());
    Ok(bundle)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema_version: u32,
    hardware_tag: String,
    feature_order: Vec<String>,
    feature_order_hash: String,
    metadata: BTreeMap<String, String>,
    trees: Vec<TreeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    target: Target,
    mask: Vec<usize>,
    classes: Vec<String>,
    max_depth: usize,
    class_weight: ClassWeight,
    cost_lambda: f64,
    train_accuracy: Option<f64>,
    test_accuracy: Option<f64>,
    cv_accuracy: Option<f64>,
    nodes: Vec<Node>,
}

impl From<&DecisionTree> for TreeFile {
    fn from(t: &DecisionTree) -> Self {
        TreeFile {
            target: t.target,
            mask: t.mask.features().map(Feature::index).collect(),
            classes: t.target.class_names().iter().map(|s| s.to_string()).collect(),
            max_depth: t.metadata.max_depth,
            class_weight: t.metadata.class_weight,
            cost_lambda: t.metadata.cost_lambda,
            train_accuracy: t.metadata.train_accuracy,
            test_accuracy: t.metadata.test_accuracy,
            cv_accuracy: t.metadata.cv_accuracy,
            nodes: t.nodes.clone(),
        }
    }
}

impl TryFrom<TreeFile> for DecisionTree {
    type Error = Error;

    fn try_from(f: TreeFile) -> Result<Self> {
        let mut ids = Vec::new();
        for &i in &f.mask {
            ids.push(Feature::from_index(i).ok_or_else(|| Error::Model(format!("unknown feature id {i} in mask")))?);
        }
        if f.classes.iter().map(String::as_str).ne(f.target.class_names().iter().copied()) {
            return Err(Error::Model(format!("class list of the {} tree does not match", f.target.name())));
        }
        let tree = DecisionTree {
            target: f.target,
            mask: FeatureMask::from_features(&ids),
            nodes: f.nodes,
            metadata: TreeMetadata {
                max_depth: f.max_depth,
                class_weight: f.class_weight,
                cost_lambda: f.cost_lambda,
                train_accuracy: f.train_accuracy,
                test_accuracy: f.test_accuracy,
                cv_accuracy: f.cv_accuracy,
            },
        };
        tree.validate()?;
        Ok(tree)
    }
}

pub fn write_model<W: Write>(out: W, bundle: &SelectorBundle) -> Result<()> {
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        hardware_tag: bundle.hardware_tag.clone(),
        feature_order: Feature::ALL.iter().map(|f| f.name().to_string()).collect(),
        feature_order_hash: feature_order_hash(),
        metadata: bundle.metadata.clone(),
        trees: Target::ALL.iter().map(|&t| TreeFile::from(bundle.tree(t))).collect(),
    };
    serde_json::to_writer_pretty(out, &file)?;
    Ok(())
}

/// Parses and fully validates a model; nothing is returned on any defect.
pub fn read_model<R: Read>(input: R) -> Result<SelectorBundle> {
    let file: ModelFile = serde_json::from_reader(input).map_err(|e| Error::Model(format!("unreadable model: {e}")))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Model(format!(
            "model schema version {} is not supported (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    if file.feature_order_hash != feature_order_hash()
        || file.feature_order.iter().map(String::as_str).ne(Feature::ALL.iter().map(|f| f.name()))
    {
        return Err(Error::Model("model was trained with a different feature order".into()));
    }
    if file.trees.len() != 3 {
        return Err(Error::Model(format!("expected 3 trees, found {}", file.trees.len())));
    }
    let mut trees = file.trees.into_iter().map(DecisionTree::try_from).collect::<Result<Vec<_>>>()?;
    let writeback = trees.pop().expect("three trees");
    let workload = trees.pop().expect("three trees");
    let pattern = trees.pop().expect("three trees");
    let mut bundle = SelectorBundle::new(pattern, workload, writeback)?;
    bundle.hardware_tag = file.hardware_tag;
    bundle.metadata = file.metadata;
    Ok(bundle)
}

pub fn save_model(path: &Path, bundle: &SelectorBundle) -> Result<()> {
    let mut buf = Vec::new();
    write_model(&mut buf, bundle)?;
    buf.push(b'\n');
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<SelectorBundle> {
    read_model(std::io::BufReader::new(std::fs::File::open(path)?))
}
