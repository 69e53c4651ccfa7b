//! Lexical complexity prediction for single words and two-word
//! expressions in context.
//!
//! The pipeline is: tokenize and count reference corpora
//! ([`corpus_stats`]), load word lists ([`lexicon`]), score word pairs with
//! collocation measures ([`assoc`]), assemble feature matrices
//! ([`features`]), fit a histogram gradient-boosted tree regressor
//! ([`gbdt`]), and evaluate with cross-validation and ablation
//! ([`harness`]).

pub mod assoc;
pub mod corpus_stats;
pub mod error;
pub mod features;
pub mod gbdt;
pub mod harness;
pub mod lexicon;
pub mod rng;

pub use error::{Error, Result};
