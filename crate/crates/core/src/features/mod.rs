//! Feature assembly: turns annotated target instances plus loaded word
//! lists and corpus counts into a fixed-schema numeric matrix.
//!
//! Missing values stay missing here; the regressor routes them.

mod dataset;
mod matrix;
mod schema;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assoc::score_pair;
use crate::corpus_stats::{FrequencyModel, Token};
use crate::error::{Error, Result};
use crate::lexicon::{load_lexicon, LemmaDictionary, LexiconTable, Manifest};

pub use dataset::{load_dataset, parse_dataset};
pub use matrix::FeatureMatrix;
pub use schema::{Aggregation, FeatureDescriptor, FeatureGroup, FeatureSchema, FeatureSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusId {
    Bible,
    Biomed,
    Europarl,
}

impl CorpusId {
    pub const ALL: [CorpusId; 3] = [CorpusId::Bible, CorpusId::Biomed, CorpusId::Europarl];

    pub fn as_str(self) -> &'static str {
        match self {
            CorpusId::Bible => "bible",
            CorpusId::Biomed => "biomed",
            CorpusId::Europarl => "europarl",
        }
    }
}

impl fmt::Display for CorpusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorpusId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "bible" => Ok(CorpusId::Bible),
            "biomed" => Ok(CorpusId::Biomed),
            "europarl" => Ok(CorpusId::Europarl),
            other => Err(Error::Data(format!("unknown corpus {other:?}"))),
        }
    }
}

/// Single-word or two-word prediction task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Single,
    Multi,
}

/// One annotated row: a target of one or two tokens in a sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetInstance {
    pub id: String,
    pub corpus: CorpusId,
    pub sentence: Vec<Token>,
    pub target: Vec<Token>,
    pub gold: Option<f64>,
}

impl TargetInstance {
    pub fn new(
        id: impl Into<String>,
        corpus: CorpusId,
        sentence: Vec<Token>,
        target: Vec<Token>,
        gold: Option<f64>,
    ) -> Result<Self> {
        let id = id.into();
        if !(1..=2).contains(&target.len()) {
            return Err(Error::Data(format!(
                "{id}: target must have 1 or 2 tokens, got {}",
                target.len()
            )));
        }
        if gold.is_some_and(|g| !g.is_finite()) {
            return Err(Error::Data(format!("{id}: non-finite gold score")));
        }
        Ok(TargetInstance {
            id,
            corpus,
            sentence,
            target,
            gold,
        })
    }

    pub fn task(&self) -> TaskKind {
        if self.target.len() == 1 {
            TaskKind::Single
        } else {
            TaskKind::Multi
        }
    }

    /// The target tokens joined by a space.
    pub fn target_text(&self) -> String {
        self.target
            .iter()
            .map(Token::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn sentence_length(&self) -> usize {
        crate::corpus_stats::sentence_length(&self.sentence)
    }

    /// Whether the target occurs as a contiguous token run in the sentence.
    pub fn target_in_sentence(&self) -> bool {
        self.sentence
            .windows(self.target.len())
            .any(|w| w == self.target.as_slice())
    }
}

/// Everything features are computed from.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub lexicons: Vec<LexiconTable>,
    pub lemmas: LemmaDictionary,
    /// Named reference-corpus counts, in manifest order.
    pub corpora: Vec<(String, FrequencyModel)>,
}

impl Resources {
    pub fn from_manifest(manifest: &Manifest) -> Result<Resources> {
        let check_name = |n: &str| {
            if n.is_empty() || n.contains([':', '\t', '@']) {
                Err(Error::Config(format!(
                    "resource name {n:?} must be nonempty and free of ':', '@' and tabs"
                )))
            } else {
                Ok(())
            }
        };
        let mut lexicons = Vec::new();
        for spec in &manifest.lexicons {
            check_name(&spec.name)?;
            if lexicons.iter().any(|t: &LexiconTable| t.name == spec.name) {
                return Err(Error::Config(format!("duplicate lexicon {:?}", spec.name)));
            }
            lexicons.push(load_lexicon(
                &spec.path,
                &spec.name,
                spec.group,
                spec.key_column,
                spec.value_column,
            )?);
        }
        let lemmas = match &manifest.lemmas {
            Some(p) => LemmaDictionary::load(p)?,
            None => LemmaDictionary::default(),
        };
        let mut corpora: Vec<(String, FrequencyModel)> = Vec::new();
        for spec in &manifest.corpora {
            check_name(&spec.name)?;
            if corpora.iter().any(|(n, _)| *n == spec.name) {
                return Err(Error::Config(format!("duplicate corpus {:?}", spec.name)));
            }
            corpora.push((spec.name.clone(), FrequencyModel::load(&spec.counts)?));
        }
        Ok(Resources {
            lexicons,
            lemmas,
            corpora,
        })
    }

    fn lexicon(&self, name: &str) -> Result<&LexiconTable> {
        self.lexicons
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::Config(format!("schema references unknown lexicon {name:?}")))
    }

    fn corpus(&self, name: &str) -> Result<&FrequencyModel> {
        self.corpora
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Config(format!("schema references unknown corpus {name:?}")))
    }
}

/// Feature configuration file: which groups are enabled, where the
/// resource manifest lives, and the admissible gold-score interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureConfig {
    #[serde(default = "all_groups")]
    pub groups: Vec<FeatureGroup>,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default = "unit_interval")]
    pub score_interval: (f64, f64),
}

fn all_groups() -> Vec<FeatureGroup> {
    FeatureGroup::ALL.to_vec()
}

fn unit_interval() -> (f64, f64) {
    (0.0, 1.0)
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            groups: all_groups(),
            manifest: None,
            score_interval: unit_interval(),
        }
    }
}

impl FeatureConfig {
    /// Reads the config; a relative `manifest` path resolves against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<FeatureConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
        let mut cfg: FeatureConfig = serde_json::from_str(&text)?;
        if let Some(m) = cfg.manifest.as_mut() {
            *m = path.parent().unwrap_or(Path::new(".")).join(&*m);
        }
        let (lo, hi) = cfg.score_interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("bad score interval [{lo}, {hi}]")));
        }
        Ok(cfg)
    }
}

fn min_max(a: Option<f64>, b: Option<f64>) -> (Option<f64>, Option<f64>) {
    match (a, b) {
        (Some(a), Some(b)) => (Some(a.min(b)), Some(a.max(b))),
        (Some(v), None) | (None, Some(v)) => (Some(v), Some(v)),
        (None, None) => (None, None),
    }
}

/// Corpus count of a form, falling back to its lemma when the surface
/// form is unseen. A form absent from the corpus has frequency 0.
fn corpus_count(model: &FrequencyModel, surface: &str, lemma: &str) -> f64 {
    let c = model.unigram(surface);
    if c > 0 {
        c as f64
    } else {
        model.unigram(lemma) as f64
    }
}

/// Computes one feature vector in schema order.
pub fn featurize(
    instance: &TargetInstance,
    resources: &Resources,
    schema: &FeatureSchema,
) -> Result<Vec<Option<f64>>> {
    if instance.task() != schema.task {
        return Err(Error::Config(format!(
            "{}: {:?} instance against a {:?} schema",
            instance.id,
            instance.task(),
            schema.task
        )));
    }
    let words: Vec<(&str, &str)> = instance
        .target
        .iter()
        .map(|t| (t.as_str(), resources.lemmas.lemma(t.as_str())))
        .collect();

    let aggregate = |per_word: Vec<Option<f64>>, agg: Aggregation| -> Result<Option<f64>> {
        match (agg, per_word.as_slice()) {
            (Aggregation::Single, [v]) => Ok(*v),
            (Aggregation::Min, [a, b]) => Ok(min_max(*a, *b).0),
            (Aggregation::Max, [a, b]) => Ok(min_max(*a, *b).1),
            _ => Err(Error::Config(format!(
                "{:?} aggregation does not fit a {}-token target",
                agg,
                per_word.len()
            ))),
        }
    };

    let mut row = Vec::with_capacity(schema.len());
    for feature in &schema.features {
        let value = match &feature.source {
            FeatureSource::Length => Some(instance.sentence_length() as f64),
            FeatureSource::Corpus(c) => Some(if *c == instance.corpus { 1.0 } else { 0.0 }),
            FeatureSource::Lexicon(name) => {
                let table = resources.lexicon(name)?;
                let per_word = words
                    .iter()
                    .map(|(s, l)| table.lookup(s, Some(l)))
                    .collect();
                aggregate(per_word, feature.aggregation)?
            }
            FeatureSource::CorpusFrequency(name) => {
                let model = resources.corpus(name)?;
                let per_word = words
                    .iter()
                    .map(|(s, l)| Some(corpus_count(model, s, l)))
                    .collect();
                aggregate(per_word, feature.aggregation)?
            }
            FeatureSource::Association { corpus, measure } => {
                let model = resources.corpus(corpus)?;
                let [(first, _), (second, _)] = words.as_slice() else {
                    return Err(Error::Config(
                        "association features need a two-token target".into(),
                    ));
                };
                score_pair(model, first, second).values()[*measure]
            }
        };
        row.push(value);
    }
    Ok(row)
}

/// Featurizes every instance, preserving order. Gold scores are attached
/// only when every instance carries one.
pub fn assemble_matrix(
    instances: &[TargetInstance],
    resources: &Resources,
    schema: &FeatureSchema,
) -> Result<FeatureMatrix> {
    if let Some(first) = instances.first() {
        if let Some(other) = instances.iter().find(|i| i.task() != first.task()) {
            return Err(Error::Config(format!(
                "mixed tasks: {} is {:?} but {} is {:?}",
                first.id,
                first.task(),
                other.id,
                other.task()
            )));
        }
    }
    let rows = instances
        .par_iter()
        .map(|i| featurize(i, resources, schema))
        .collect::<Result<Vec<_>>>()?;
    let targets = instances
        .iter()
        .map(|i| i.gold)
        .collect::<Option<Vec<f64>>>()
        .filter(|_| !instances.is_empty());
    Ok(FeatureMatrix {
        schema: schema.clone(),
        ids: instances.iter().map(|i| i.id.clone()).collect(),
        rows,
        targets,
    })
}

/// Task of a dataset, or an error if it mixes single and two-word targets.
pub fn dataset_task(instances: &[TargetInstance]) -> Result<TaskKind> {
    let Some(first) = instances.first() else {
        return Err(Error::Data("empty dataset".into()));
    };
    if instances.iter().any(|i| i.task() != first.task()) {
        return Err(Error::Config(
            "dataset mixes single and two-word targets".into(),
        ));
    }
    Ok(first.task())
}
