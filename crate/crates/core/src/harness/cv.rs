use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{assemble_matrix, FeatureMatrix, FeatureSchema, Resources, TargetInstance};
use crate::gbdt::{GbdtParams, Trainer};
use crate::harness::folds::{
    kfold_split, kfold_split_grouped, kfold_split_stratified, FoldAssignment,
};
use crate::harness::metrics::pearson;

#[derive(Debug, Clone)]
pub struct CvOptions {
    pub k: usize,
    pub seed: u64,
    /// Deal folds within each source corpus.
    pub stratify_by_corpus: bool,
    /// Confine every target string to a single fold.
    pub group_by_target: bool,
    /// Also score the pooled out-of-fold predictions.
    pub pooled: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k: 9,
            seed: 0,
            stratify_by_corpus: false,
            group_by_target: false,
            pooled: false,
        }
    }
}

impl CvOptions {
    pub fn folds_for(&self, instances: &[TargetInstance]) -> Result<FoldAssignment> {
        match (self.group_by_target, self.stratify_by_corpus) {
            (true, true) => Err(Error::Config(
                "group-by-target and corpus stratification are exclusive".into(),
            )),
            (true, false) => {
                let keys: Vec<String> = instances.iter().map(|i| i.target_text()).collect();
                kfold_split_grouped(&keys, self.k, self.seed)
            }
            (false, true) => {
                let labels: Vec<_> = instances.iter().map(|i| i.corpus).collect();
                kfold_split_stratified(&labels, self.k, self.seed)
            }
            (false, false) => kfold_split(instances.len(), self.k, self.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldScore {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: Vec<FoldScore>,
    /// Unweighted mean of the per-fold correlations.
    pub mean_r: f64,
    pub pooled_r: Option<f64>,
}

impl CvReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("fold\tn_train\tn_test\tr\n");
        for f in &self.folds {
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.6}\n",
                f.fold, f.n_train, f.n_test, f.r
            ));
        }
        out.push_str(&format!("mean\t\t\t{:.6}\n", self.mean_r));
        if let Some(p) = self.pooled_r {
            out.push_str(&format!("pooled\t\t\t{p:.6}\n"));
        }
        out
    }
}

/// A fold's score and its `(row, prediction)` pairs.
type FoldOutput = (FoldScore, Vec<(usize, f64)>);

fn fold_predictions(
    matrix: &FeatureMatrix,
    folds: &FoldAssignment,
    params: &GbdtParams,
    f: usize,
) -> Result<FoldOutput> {
    let (train_idx, test_idx) = folds.split(f);
    let train = matrix.select_rows(&train_idx);
    let test = matrix.select_rows(&test_idx);
    let model = Trainer::new(params.clone()).fit(&train)?;
    let pred = model.predict(&test)?;
    let gold = test.targets.as_deref().unwrap_or_default();
    let r = pearson(&pred, gold)?;
    Ok((
        FoldScore {
            fold: f,
            n_train: train_idx.len(),
            n_test: test_idx.len(),
            r,
        },
        test_idx.into_iter().zip(pred).collect(),
    ))
}

/// Cross-validates on a labeled matrix: for each fold, trains on the other
/// folds and correlates predictions with gold on the held-out fold. Folds
/// run in parallel; the report is in fold order. A failing fold aborts
/// with its index attached.
pub fn run_cv_matrix(
    matrix: &FeatureMatrix,
    folds: &FoldAssignment,
    params: &GbdtParams,
    pooled: bool,
) -> Result<CvReport> {
    let Some(gold) = matrix.targets.as_deref() else {
        return Err(Error::Data("cross-validation needs gold scores".into()));
    };
    if folds.folds.len() != matrix.n_rows() {
        return Err(Error::Config(format!(
            "fold assignment covers {} rows, matrix has {}",
            folds.folds.len(),
            matrix.n_rows()
        )));
    }
    let results: Vec<Result<FoldOutput>> = (0..folds.k)
        .into_par_iter()
        .map(|f| {
            fold_predictions(matrix, folds, params, f).map_err(|e| Error::Fold {
                fold: f,
                source: Box::new(e),
            })
        })
        .collect();

    let mut scores = Vec::with_capacity(folds.k);
    let mut oof = vec![0.0; matrix.n_rows()];
    for r in results {
        let (score, preds) = r?;
        for (i, p) in preds {
            oof[i] = p;
        }
        scores.push(score);
    }
    let mean_r = scores.iter().map(|s| s.r).sum::<f64>() / scores.len() as f64;
    let pooled_r = if pooled {
        Some(pearson(&oof, gold)?)
    } else {
        None
    };
    Ok(CvReport {
        folds: scores,
        mean_r,
        pooled_r,
    })
}

/// Featurizes a labeled dataset and cross-validates it.
pub fn run_cv(
    instances: &[TargetInstance],
    resources: &Resources,
    schema: &FeatureSchema,
    params: &GbdtParams,
    options: &CvOptions,
) -> Result<CvReport> {
    let matrix = assemble_matrix(instances, resources, schema)?;
    if matrix.targets.is_none() {
        return Err(Error::Data(
            "every instance needs a gold score for CV".into(),
        ));
    }
    let folds = options.folds_for(instances)?;
    run_cv_matrix(&matrix, &folds, params, options.pooled)
}
