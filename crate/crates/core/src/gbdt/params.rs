use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Booster settings. Defaults are the tuned values used for both the
/// single-word and two-word tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbdtParams {
    pub num_iterations: usize,
    pub learning_rate: f64,
    pub num_leaves: usize,
    /// Maximum tree depth; zero or negative means unlimited.
    pub max_depth: i32,
    pub min_data_in_leaf: usize,
    pub lambda_l2: f64,
    /// Resample the bag every this many iterations; 0 disables bagging.
    pub bagging_freq: usize,
    pub bagging_fraction: f64,
    pub feature_fraction: f64,
    pub max_bin: usize,
    pub min_data_in_bin: usize,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            num_iterations: 4800,
            learning_rate: 0.0035,
            num_leaves: 11,
            max_depth: 7,
            min_data_in_leaf: 7,
            lambda_l2: 0.0175,
            bagging_freq: 5,
            bagging_fraction: 0.66,
            feature_fraction: 0.09,
            max_bin: 64,
            min_data_in_bin: 10,
            seed: 0,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("invalid parameter: {what}")))
            }
        };
        check(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "learning_rate > 0",
        )?;
        check(self.num_leaves >= 2, "num_leaves >= 2")?;
        check(
            self.bagging_fraction > 0.0 && self.bagging_fraction <= 1.0,
            "0 < bagging_fraction <= 1",
        )?;
        check(
            self.feature_fraction > 0.0 && self.feature_fraction <= 1.0,
            "0 < feature_fraction <= 1",
        )?;
        check(
            (2..=u16::MAX as usize - 1).contains(&self.max_bin),
            "2 <= max_bin < 65535",
        )?;
        check(
            self.lambda_l2 >= 0.0 && self.lambda_l2.is_finite(),
            "lambda_l2 >= 0",
        )?;
        Ok(())
    }

    /// Parameters with bagging and feature sampling switched off.
    pub fn without_sampling(mut self) -> Self {
        self.bagging_fraction = 1.0;
        self.bagging_freq = 0;
        self.feature_fraction = 1.0;
        self
    }

    pub(crate) fn min_leaf_rows(&self) -> usize {
        self.min_data_in_leaf.max(1)
    }

    pub(crate) fn depth_allows_split(&self, depth: usize) -> bool {
        self.max_depth <= 0 || depth < self.max_depth as usize
    }
}
