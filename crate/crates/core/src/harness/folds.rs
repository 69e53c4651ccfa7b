use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Fold index per instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub folds: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    /// Row indices of fold `f` (test rows) and of its complement (training rows).
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &fold) in self.folds.iter().enumerate() {
            if fold == f {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.folds {
            sizes[f] += 1;
        }
        sizes
    }
}

fn check(n: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::Data(format!("{n} instances cannot fill {k} folds")));
    }
    Ok(())
}

/// Shuffles `0..n` with `seed` and deals the permutation round-robin into
/// `k` folds, so fold sizes differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    check(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    Rng::new(seed).shuffle(&mut order);
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k;
    }
    Ok(FoldAssignment { folds, k, seed })
}

/// Like [`kfold_split`] but deals each stratum in turn, continuing the
/// round-robin across strata, so every fold gets a near-equal share of
/// each label and overall sizes still differ by at most one.
pub fn kfold_split_stratified<L: Ord>(labels: &[L], k: usize, seed: u64) -> Result<FoldAssignment> {
    check(labels.len(), k)?;
    let mut strata: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        strata.entry(l).or_default().push(i);
    }
    let mut rng = Rng::new(seed);
    let mut folds = vec![0; labels.len()];
    let mut pos = 0;
    for members in strata.values_mut() {
        rng.shuffle(members);
        for &i in members.iter() {
            folds[i] = pos % k;
            pos += 1;
        }
    }
    Ok(FoldAssignment { folds, k, seed })
}

/// Keeps all instances sharing a group key (e.g. the same target string)
/// in one fold. Groups are shuffled and each goes to the currently
/// smallest fold (lowest index on ties).
pub fn kfold_split_grouped<G: Ord>(groups: &[G], k: usize, seed: u64) -> Result<FoldAssignment> {
    check(groups.len(), k)?;
    let mut by_key: BTreeMap<&G, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        by_key.entry(g).or_default().push(i);
    }
    if by_key.len() < k {
        return Err(Error::Data(format!(
            "{} distinct groups cannot fill {k} folds",
            by_key.len()
        )));
    }
    let mut members: Vec<Vec<usize>> = by_key.into_values().collect();
    Rng::new(seed).shuffle(&mut members);
    let mut sizes = vec![0usize; k];
    let mut folds = vec![0; groups.len()];
    for group in members {
        let f = (0..k).min_by_key(|&f| sizes[f]).unwrap();
        sizes[f] += group.len();
        for i in group {
            folds[i] = f;
        }
    }
    Ok(FoldAssignment { folds, k, seed })
}
