//! Evaluation: correlation, fold assignment, cross-validation, feature
//! ablation, and target repetition statistics.

mod ablation;
mod cv;
mod folds;
mod metrics;
mod report;

pub use ablation::{ablate, AblationConfig, AblationKind, AblationReport, AblationRow};
pub use cv::{run_cv, run_cv_matrix, CvOptions, CvReport, FoldScore};
pub use folds::{kfold_split, kfold_split_grouped, kfold_split_stratified, FoldAssignment};
pub use metrics::pearson;
pub use report::{repetition_report, RangeSummary, RepetitionReport};
