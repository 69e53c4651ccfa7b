//! Histogram-binned gradient-boosted regression trees.
//!
//! Squared-error objective, leaf-wise growth bounded by `num_leaves` and
//! `max_depth`, L2 leaf regularization, periodic row bagging, per-tree
//! feature sampling, and learned default directions for missing values.

mod bins;
mod model;
mod params;
mod train;
mod tree;

pub use bins::{build_bins, BinMapper, BinnedData, FeatureBins};
pub use model::GbdtModel;
pub use params::GbdtParams;
pub use train::{train, LossTrace, Trainer};
pub use tree::{find_best_split, grow_tree, Gradients, Node, SplitCandidate, Tree};

/// Predictions of `model` on `matrix`.
pub fn predict(
    model: &GbdtModel,
    matrix: &crate::features::FeatureMatrix,
) -> crate::Result<Vec<f64>> {
    model.predict(matrix)
}
