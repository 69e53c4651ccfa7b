use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::gbdt::bins::{BinMapper, BinnedData};
use crate::gbdt::model::GbdtModel;
use crate::gbdt::params::GbdtParams;
use crate::gbdt::tree::{grow_tree, Gradients};
use crate::rng::Rng;

// Salt separating the feature-sampling stream from the bagging stream,
// both seeded with `seed + iteration`.
const FEATURE_STREAM: u64 = 0x5EED_FEA7_0000_0001;

/// Fits a [`GbdtModel`] on a labeled matrix.
///
/// Training is deterministic: the same matrix, parameters, and seed give a
/// bit-identical model for any worker count.
#[derive(Debug, Clone)]
pub struct Trainer {
    params: GbdtParams,
    workers: usize,
}

/// Per-iteration full-data mean squared error, index 0 being the base score.
pub type LossTrace = Vec<f64>;

impl Trainer {
    pub fn new(params: GbdtParams) -> Self {
        Trainer { params, workers: 0 }
    }

    /// Number of worker threads; 0 uses the global rayon pool.
    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn fit(&self, matrix: &FeatureMatrix) -> Result<GbdtModel> {
        self.run(matrix, false).map(|(m, _)| m)
    }

    pub fn fit_with_trace(&self, matrix: &FeatureMatrix) -> Result<(GbdtModel, LossTrace)> {
        self.run(matrix, true)
    }

    fn run(&self, matrix: &FeatureMatrix, trace: bool) -> Result<(GbdtModel, LossTrace)> {
        if self.workers == 0 {
            return fit_inner(&self.params, matrix, trace);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Training(format!("cannot build thread pool: {e}")))?;
        pool.install(|| fit_inner(&self.params, matrix, trace))
    }
}

/// Trains with the global thread pool.
pub fn train(matrix: &FeatureMatrix, params: &GbdtParams) -> Result<GbdtModel> {
    Trainer::new(params.clone()).fit(matrix)
}

fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter()
        .zip(y)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / y.len() as f64
}

fn fit_inner(
    params: &GbdtParams,
    matrix: &FeatureMatrix,
    trace: bool,
) -> Result<(GbdtModel, LossTrace)> {
    params.validate()?;
    let Some(y) = matrix.targets.as_deref() else {
        return Err(Error::Training("matrix has no gold scores".into()));
    };
    let n = matrix.n_rows();
    if n < 2 {
        return Err(Error::Training(format!(
            "need at least 2 labeled rows, got {n}"
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite gold score at row {i}")));
    }

    let bins = BinMapper::fit(matrix, params.max_bin, params.min_data_in_bin);
    let data: BinnedData = bins.transform(matrix)?;
    let n_features = matrix.n_cols();
    let all_features: Vec<usize> = (0..n_features).collect();
    let per_tree = ((params.feature_fraction * n_features as f64).floor() as usize).max(1);
    let bagging = params.bagging_fraction < 1.0 && params.bagging_freq > 0;

    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let mut losses = Vec::new();
    if trace {
        losses.push(mse(&pred, y));
    }

    let mut bag: Vec<u32> = (0..n as u32).collect();
    let mut trees = Vec::with_capacity(params.num_iterations);
    let mut grads = vec![0.0; n];

    for it in 0..params.num_iterations {
        let stream = params.seed.wrapping_add(it as u64);
        if bagging && it % params.bagging_freq == 0 {
            let size = (params.bagging_fraction * n as f64).floor() as usize;
            bag = Rng::new(stream)
                .sample_indices(n, size)
                .into_iter()
                .map(|i| i as u32)
                .collect();
        }
        if bag.len() < params.min_leaf_rows() {
            return Err(Error::Training(format!(
                "bag of {} rows cannot satisfy min_data_in_leaf = {}",
                bag.len(),
                params.min_data_in_leaf
            )));
        }
        let allowed = if per_tree < n_features {
            Rng::new(stream ^ FEATURE_STREAM).sample_indices(n_features, per_tree)
        } else {
            all_features.clone()
        };

        grads
            .par_iter_mut()
            .zip(pred.par_iter().zip(y.par_iter()))
            .for_each(|(g, (p, t))| *g = p - t);
        let quantized = Gradients::new(&grads);
        let tree = grow_tree(&data, bag.clone(), &quantized, &allowed, params);

        pred.par_iter_mut()
            .enumerate()
            .for_each(|(row, p)| *p += tree.predict_binned(&data, row));
        trees.push(tree);
        if trace {
            losses.push(mse(&pred, y));
        }
    }

    let model = GbdtModel::new(
        params.clone(),
        matrix.schema.names(),
        bins,
        base_score,
        trees,
    );
    Ok((model, losses))
}
