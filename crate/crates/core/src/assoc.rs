//! Bigram association measures over a 2×2 contingency table.
//!
//! The formulas are the standard textbook definitions from the collocation
//! literature: PMI and t-score (Church & Hanks), z-score (Berry-Rogghe),
//! log-likelihood G² (Dunning), simple-ll (Evert), Dice, and the two
//! delta-p directions. PMI uses log base 2; G² and simple-ll use natural
//! logarithms. A measure whose formula would divide by zero or take the log
//! of zero is reported as `None`.

use serde::{Deserialize, Serialize};

use crate::corpus_stats::FrequencyModel;
use crate::error::{Error, Result};

/// Observed counts for a word pair `(w1, w2)`:
///
/// ```text
///              w2      ¬w2
///   w1        o11      o12     r1
///   ¬w1       o21      o22
///             c1                n
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub o11: f64,
    pub o12: f64,
    pub o21: f64,
    pub o22: f64,
}

impl ContingencyTable {
    /// Validates the cells directly: all finite and nonnegative, `n > 0`.
    pub fn new(o11: f64, o12: f64, o21: f64, o22: f64) -> Result<Self> {
        let cells = [o11, o12, o21, o22];
        if cells.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InconsistentCounts(format!(
                "cells must be finite and nonnegative, got {cells:?}"
            )));
        }
        if cells.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InconsistentCounts("n must be positive".into()));
        }
        Ok(ContingencyTable { o11, o12, o21, o22 })
    }

    pub fn n(&self) -> f64 {
        self.o11 + self.o12 + self.o21 + self.o22
    }

    /// Frequency of the first word.
    pub fn r1(&self) -> f64 {
        self.o11 + self.o12
    }

    /// Frequency of the second word.
    pub fn c1(&self) -> f64 {
        self.o11 + self.o21
    }

    /// Expected bigram count under independence.
    pub fn e11(&self) -> f64 {
        self.r1() * self.c1() / self.n()
    }
}

/// Builds the table from word frequencies `f1`, `f2`, bigram frequency
/// `f12` and the number of bigram tokens `n`.
pub fn make_contingency(f1: u64, f2: u64, f12: u64, n: u64) -> Result<ContingencyTable> {
    if n == 0 {
        return Err(Error::InconsistentCounts("n > 0 violated (n = 0)".into()));
    }
    if f12 > f1 {
        return Err(Error::InconsistentCounts(format!(
            "f12 <= f1 violated ({f12} > {f1})"
        )));
    }
    if f12 > f2 {
        return Err(Error::InconsistentCounts(format!(
            "f12 <= f2 violated ({f12} > {f2})"
        )));
    }
    // f12 <= f1 so the subtraction cannot underflow.
    let union = (f1 - f12) as u128 + f2 as u128;
    if union > n as u128 {
        return Err(Error::InconsistentCounts(format!(
            "f1 + f2 - f12 <= n violated ({union} > {n})"
        )));
    }
    Ok(ContingencyTable {
        o11: f12 as f64,
        o12: (f1 - f12) as f64,
        o21: (f2 - f12) as f64,
        o22: (n as u128 - union) as f64,
    })
}

/// The eight association scores of one word pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AssocScores {
    pub pmi: Option<f64>,
    pub t_score: Option<f64>,
    pub z_score: Option<f64>,
    pub g2: Option<f64>,
    pub simple_ll: Option<f64>,
    pub dice: Option<f64>,
    pub dp_2_given_1: Option<f64>,
    pub dp_1_given_2: Option<f64>,
}

impl AssocScores {
    pub const NAMES: [&'static str; 8] = [
        "pmi",
        "t_score",
        "z_score",
        "g2",
        "simple_ll",
        "dice",
        "dp_2_given_1",
        "dp_1_given_2",
    ];

    /// Scores in the order of [`AssocScores::NAMES`].
    pub fn values(&self) -> [Option<f64>; 8] {
        [
            self.pmi,
            self.t_score,
            self.z_score,
            self.g2,
            self.simple_ll,
            self.dice,
            self.dp_2_given_1,
            self.dp_1_given_2,
        ]
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 {
        None
    } else {
        finite(num / den)
    }
}

pub fn compute_association_measures(t: &ContingencyTable) -> AssocScores {
    let n = t.n();
    let r1 = t.r1();
    let c1 = t.c1();
    let r2 = n - r1;
    let c2 = n - c1;
    let e11 = t.e11();
    let o11 = t.o11;

    let observed_positive = o11 > 0.0 && e11 > 0.0;

    let pmi = observed_positive
        .then(|| (o11 / e11).log2())
        .and_then(finite);
    let t_score = (o11 > 0.0)
        .then(|| (o11 - e11) / o11.sqrt())
        .and_then(finite);
    let z_score = (e11 > 0.0)
        .then(|| (o11 - e11) / e11.sqrt())
        .and_then(finite);
    let simple_ll = observed_positive
        .then(|| 2.0 * (o11 * (o11 / e11).ln() - (o11 - e11)))
        .and_then(finite);

    let cells = [
        (t.o11, r1, c1),
        (t.o12, r1, c2),
        (t.o21, r2, c1),
        (t.o22, r2, c2),
    ];
    let mut ll = 0.0;
    for (o, row, col) in cells {
        if o > 0.0 {
            ll += o * (o / (row * col / n)).ln();
        }
    }
    // Rounding can push an exact-zero deviance a few ulps below zero.
    let g2 = finite((2.0 * ll).max(0.0));

    let dice = ratio(2.0 * o11, r1 + c1);
    let dp_2_given_1 = ratio(o11, r1).zip(ratio(t.o21, r2)).map(|(a, b)| a - b);
    let dp_1_given_2 = ratio(o11, c1).zip(ratio(t.o12, c2)).map(|(a, b)| a - b);

    AssocScores {
        pmi,
        t_score,
        z_score,
        g2,
        simple_ll,
        dice,
        dp_2_given_1,
        dp_1_given_2,
    }
}

/// Scores the pair `(first, second)` against a frequency model, using
/// unigram counts as word frequencies and the bigram-token total as `n`.
/// Pairs whose counts violate the table preconditions score all-missing.
pub fn score_pair(model: &FrequencyModel, first: &str, second: &str) -> AssocScores {
    match make_contingency(
        model.unigram(first),
        model.unigram(second),
        model.bigram(first, second),
        model.total_bigrams(),
    ) {
        Ok(table) => compute_association_measures(&table),
        Err(_) => AssocScores::default(),
    }
}
