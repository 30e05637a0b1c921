//! Kernel selection: decision trees, their training, and the model file.

mod bundle;
mod chi2;
mod dataset;
mod search;
mod tree;

pub use bundle::{
    feature_order_hash, load_model, read_model, save_model, train_selector, write_model, SelectorBundle, TrainOptions,
    SCHEMA_VERSION,
};
pub use chi2::{chi2_rank, chi2_scores};
pub use dataset::{
    design, load_training_csv, oracle_kernel, read_training_csv, save_training_csv, split_samples, write_training_csv,
    Labels, TrainingSample,
};
pub use search::{fold_assignment, grid_search, GridPoint, GridScore, SearchGrid, SearchOutcome};
pub use tree::{class_weights, gini_impurity, ClassWeight, DecisionTree, Node, Target, TreeMetadata, TreeParams};
