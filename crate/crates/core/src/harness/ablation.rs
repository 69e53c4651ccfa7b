use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureMatrix};
use crate::gbdt::{GbdtParams, Trainer};
use crate::harness::cv::{run_cv_matrix, CvReport};
use crate::harness::folds::FoldAssignment;
use crate::harness::metrics::pearson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AblationKind {
    /// Drop the listed groups.
    Without,
    /// Keep only the listed groups.
    Only,
}

/// One reduced feature configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationConfig {
    pub label: String,
    pub kind: AblationKind,
    pub groups: Vec<FeatureGroup>,
}

impl AblationConfig {
    pub fn without(label: impl Into<String>, groups: Vec<FeatureGroup>) -> Self {
        AblationConfig {
            label: label.into(),
            kind: AblationKind::Without,
            groups,
        }
    }

    pub fn only(label: impl Into<String>, groups: Vec<FeatureGroup>) -> Self {
        AblationConfig {
            label: label.into(),
            kind: AblationKind::Only,
            groups,
        }
    }

    fn apply(&self, m: &FeatureMatrix) -> FeatureMatrix {
        match self.kind {
            AblationKind::Without => m.without_groups(&self.groups),
            AblationKind::Only => m.only_groups(&self.groups),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub config: AblationConfig,
    pub cv_r: f64,
    /// Reduced minus full CV r.
    pub cv_diff: f64,
    pub test_r: Option<f64>,
    pub test_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub full_cv: CvReport,
    pub full_test_r: Option<f64>,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    /// Full-system r first, then one diff row per configuration.
    pub fn to_tsv(&self) -> String {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:+.4}")).unwrap_or_default();
        let mut out = String::from("config\tgroups\ttest\tcv\n");
        out.push_str(&format!(
            "full\t\t{}\t{:.4}\n",
            self.full_test_r
                .map(|x| format!("{x:.4}"))
                .unwrap_or_default(),
            self.full_cv.mean_r
        ));
        for row in &self.rows {
            let groups: Vec<&str> = row.config.groups.iter().map(|g| g.as_str()).collect();
            let kind = match row.config.kind {
                AblationKind::Without => "-",
                AblationKind::Only => "only:",
            };
            out.push_str(&format!(
                "{}\t{kind}{}\t{}\t{}\n",
                row.config.label,
                groups.join(","),
                fmt(row.test_diff),
                fmt(Some(row.cv_diff)),
            ));
        }
        out
    }
}

fn test_r(train: &FeatureMatrix, test: &FeatureMatrix, params: &GbdtParams) -> Result<f64> {
    let model = Trainer::new(params.clone()).fit(train)?;
    let pred = model.predict(test)?;
    let gold = test
        .targets
        .as_deref()
        .ok_or_else(|| Error::Data("test set needs gold scores".into()))?;
    pearson(&pred, gold)
}

/// Cross-validates the full matrix and every reduced configuration on the
/// same folds and parameters, reporting r differences from the full
/// system. With a labeled `test` matrix (same columns as `matrix`), each
/// configuration is also trained on all of `matrix` and scored on `test`.
pub fn ablate(
    matrix: &FeatureMatrix,
    folds: &FoldAssignment,
    params: &GbdtParams,
    configs: &[AblationConfig],
    test: Option<&FeatureMatrix>,
) -> Result<AblationReport> {
    let present = matrix.schema.groups();
    for c in configs {
        if let Some(g) = c.groups.iter().find(|g| !present.contains(g)) {
            return Err(Error::Config(format!(
                "ablation group {g} is not in the schema"
            )));
        }
    }
    if let Some(t) = test {
        if t.schema.names() != matrix.schema.names() {
            return Err(Error::Config(
                "test matrix columns differ from training".into(),
            ));
        }
    }

    let full_cv = run_cv_matrix(matrix, folds, params, false)?;
    let full_test_r = test.map(|t| test_r(matrix, t, params)).transpose()?;

    let rows = configs
        .par_iter()
        .map(|c| {
            let reduced = c.apply(matrix);
            let cv = run_cv_matrix(&reduced, folds, params, false)?;
            let t_r = test
                .map(|t| test_r(&reduced, &c.apply(t), params))
                .transpose()?;
            Ok(AblationRow {
                config: c.clone(),
                cv_r: cv.mean_r,
                cv_diff: cv.mean_r - full_cv.mean_r,
                test_r: t_r,
                test_diff: t_r.zip(full_test_r).map(|(a, b)| a - b),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(AblationReport {
        full_cv,
        full_test_r,
        rows,
    })
}
