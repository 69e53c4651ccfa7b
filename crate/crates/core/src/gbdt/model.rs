use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::gbdt::bins::BinMapper;
use crate::gbdt::params::GbdtParams;
use crate::gbdt::tree::Tree;

const FORMAT: &str = "lexcomp-gbdt";
const VERSION: u32 = 1;

/// A trained ensemble: `base_score + Σ trees`, with the bin boundaries
/// needed to route raw feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub format: String,
    pub version: u32,
    pub params: GbdtParams,
    pub feature_names: Vec<String>,
    pub bins: BinMapper,
    pub base_score: f64,
    pub trees: Vec<Tree>,
}

impl GbdtModel {
    pub(crate) fn new(
        params: GbdtParams,
        feature_names: Vec<String>,
        bins: BinMapper,
        base_score: f64,
        trees: Vec<Tree>,
    ) -> Self {
        GbdtModel {
            format: FORMAT.to_string(),
            version: VERSION,
            params,
            feature_names,
            bins,
            base_score,
            trees,
        }
    }

    pub fn predict_row(&self, row: &[Option<f64>]) -> f64 {
        let bins: Vec<(u16, bool)> = self
            .bins
            .features
            .iter()
            .zip(row)
            .map(|(fb, v)| {
                let b = fb.bin(*v);
                (b, b == fb.missing_bin())
            })
            .collect();
        self.base_score + self.trees.iter().map(|t| t.route(|f| bins[f])).sum::<f64>()
    }

    /// Predictions for every row. The matrix columns must carry exactly the
    /// model's feature names, in order. Outputs are not clamped.
    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        let names = matrix.schema.names();
        if names != self.feature_names {
            return Err(Error::Config(format!(
                "matrix columns {:?} do not match model features {:?}",
                names, self.feature_names
            )));
        }
        Ok(matrix
            .rows
            .par_iter()
            .map(|r| self.predict_row(r))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<GbdtModel> {
        let model: GbdtModel = serde_json::from_str(text)?;
        if model.format != FORMAT || model.version != VERSION {
            return Err(Error::format(
                "model",
                format!("unsupported format {} v{}", model.format, model.version),
            ));
        }
        if model.bins.features.len() != model.feature_names.len() {
            return Err(Error::format(
                "model",
                "bin mapper and feature names disagree",
            ));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<GbdtModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
        GbdtModel::from_json(&text)
    }
}
