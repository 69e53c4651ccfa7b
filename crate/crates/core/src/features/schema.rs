use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assoc::AssocScores;
use crate::error::{Error, Result};
use crate::features::{CorpusId, Resources, TaskKind};
use crate::lexicon::LexiconGroup;

/// Feature families, the unit of ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Length,
    CorpusId,
    Frequency,
    Norm,
    Psychometric,
    Association,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 6] = [
        FeatureGroup::Length,
        FeatureGroup::CorpusId,
        FeatureGroup::Frequency,
        FeatureGroup::Norm,
        FeatureGroup::Psychometric,
        FeatureGroup::Association,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::Length => "length",
            FeatureGroup::CorpusId => "corpus_id",
            FeatureGroup::Frequency => "frequency",
            FeatureGroup::Norm => "norm",
            FeatureGroup::Psychometric => "psychometric",
            FeatureGroup::Association => "association",
        }
    }

    /// Resolves a group name or one of the short ablation aliases
    /// (`corpus`, `freq`, `norms`, `assoc`). `norms` covers both the
    /// norm and psychometric families.
    pub fn parse_alias(name: &str) -> Result<Vec<FeatureGroup>> {
        let groups = match name.trim() {
            "length" => vec![FeatureGroup::Length],
            "corpus" | "corpus_id" => vec![FeatureGroup::CorpusId],
            "freq" | "frequency" => vec![FeatureGroup::Frequency],
            "norm" => vec![FeatureGroup::Norm],
            "psychometric" | "psych" => vec![FeatureGroup::Psychometric],
            "norms" => vec![FeatureGroup::Norm, FeatureGroup::Psychometric],
            "assoc" | "association" => vec![FeatureGroup::Association],
            other => return Err(Error::Config(format!("unknown feature group {other:?}"))),
        };
        Ok(groups)
    }
}

impl From<LexiconGroup> for FeatureGroup {
    fn from(g: LexiconGroup) -> Self {
        match g {
            LexiconGroup::Frequency => FeatureGroup::Frequency,
            LexiconGroup::Norm => FeatureGroup::Norm,
            LexiconGroup::Psychometric => FeatureGroup::Psychometric,
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature group {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Single,
    Min,
    Max,
}

/// Where a feature's value comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSource {
    Length,
    Corpus(CorpusId),
    Lexicon(String),
    CorpusFrequency(String),
    Association { corpus: String, measure: usize },
}

/// One schema column. Its name is self-describing:
///
/// ```text
/// length
/// corpus_id:<bible|biomed|europarl>
/// <frequency|norm|psychometric>:<table>[:min|:max]
/// frequency:@<corpus>[:min|:max]
/// association:<corpus>:<measure>
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureDescriptor {
    pub name: String,
    pub group: FeatureGroup,
    pub aggregation: Aggregation,
    pub source: FeatureSource,
}

impl FeatureDescriptor {
    fn new(group: FeatureGroup, aggregation: Aggregation, source: FeatureSource) -> Self {
        let base = match &source {
            FeatureSource::Length => "length".to_string(),
            FeatureSource::Corpus(c) => format!("corpus_id:{c}"),
            FeatureSource::Lexicon(t) => format!("{group}:{t}"),
            FeatureSource::CorpusFrequency(c) => format!("frequency:@{c}"),
            FeatureSource::Association { corpus, measure } => {
                format!("association:{corpus}:{}", AssocScores::NAMES[*measure])
            }
        };
        let name = match aggregation {
            Aggregation::Single => base,
            Aggregation::Min => format!("{base}:min"),
            Aggregation::Max => format!("{base}:max"),
        };
        FeatureDescriptor {
            name,
            group,
            aggregation,
            source,
        }
    }

    /// Inverse of the naming scheme above.
    pub fn parse(name: &str) -> Result<FeatureDescriptor> {
        let bad = || Error::Config(format!("unrecognised feature name {name:?}"));
        let mut parts: Vec<&str> = name.split(':').collect();
        let aggregation = match parts.last() {
            Some(&"min") if parts.len() > 2 => Aggregation::Min,
            Some(&"max") if parts.len() > 2 => Aggregation::Max,
            _ => Aggregation::Single,
        };
        if aggregation != Aggregation::Single {
            parts.pop();
        }
        let (group, source) = match parts.as_slice() {
            ["length"] => (FeatureGroup::Length, FeatureSource::Length),
            ["corpus_id", c] => (FeatureGroup::CorpusId, FeatureSource::Corpus(c.parse()?)),
            ["frequency", t] if t.starts_with('@') => (
                FeatureGroup::Frequency,
                FeatureSource::CorpusFrequency(t[1..].to_string()),
            ),
            ["association", corpus, measure] => {
                let measure = AssocScores::NAMES
                    .iter()
                    .position(|m| m == measure)
                    .ok_or_else(bad)?;
                (
                    FeatureGroup::Association,
                    FeatureSource::Association {
                        corpus: corpus.to_string(),
                        measure,
                    },
                )
            }
            [g, t] => {
                let group: LexiconGroup = g.parse().map_err(|_| bad())?;
                (group.into(), FeatureSource::Lexicon(t.to_string()))
            }
            _ => return Err(bad()),
        };
        let d = FeatureDescriptor::new(group, aggregation, source);
        if d.name != name {
            return Err(bad());
        }
        Ok(d)
    }
}

/// Ordered feature columns for one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    pub task: TaskKind,
    pub features: Vec<FeatureDescriptor>,
}

impl FeatureSchema {
    /// Lays out every enabled group in a fixed order: length, corpus
    /// one-hot, lexicon tables in manifest order, corpus frequencies,
    /// association measures. Lexicon-backed features are doubled into
    /// min/max columns for two-word targets; association features only
    /// exist for two-word targets.
    pub fn build(task: TaskKind, resources: &Resources, enabled: &[FeatureGroup]) -> FeatureSchema {
        let on = |g: FeatureGroup| enabled.contains(&g);
        let aggs: &[Aggregation] = match task {
            TaskKind::Single => &[Aggregation::Single],
            TaskKind::Multi => &[Aggregation::Min, Aggregation::Max],
        };
        let mut features = Vec::new();

        if on(FeatureGroup::Length) {
            features.push(FeatureDescriptor::new(
                FeatureGroup::Length,
                Aggregation::Single,
                FeatureSource::Length,
            ));
        }
        if on(FeatureGroup::CorpusId) {
            for c in CorpusId::ALL {
                features.push(FeatureDescriptor::new(
                    FeatureGroup::CorpusId,
                    Aggregation::Single,
                    FeatureSource::Corpus(c),
                ));
            }
        }
        for group in [
            FeatureGroup::Frequency,
            FeatureGroup::Norm,
            FeatureGroup::Psychometric,
        ] {
            if !on(group) {
                continue;
            }
            for table in resources
                .lexicons
                .iter()
                .filter(|t| FeatureGroup::from(t.group) == group)
            {
                for &agg in aggs {
                    features.push(FeatureDescriptor::new(
                        group,
                        agg,
                        FeatureSource::Lexicon(table.name.clone()),
                    ));
                }
            }
            if group == FeatureGroup::Frequency {
                for (corpus, _) in &resources.corpora {
                    for &agg in aggs {
                        features.push(FeatureDescriptor::new(
                            group,
                            agg,
                            FeatureSource::CorpusFrequency(corpus.clone()),
                        ));
                    }
                }
            }
        }
        if task == TaskKind::Multi && on(FeatureGroup::Association) {
            for (corpus, _) in &resources.corpora {
                for measure in 0..AssocScores::NAMES.len() {
                    features.push(FeatureDescriptor::new(
                        FeatureGroup::Association,
                        Aggregation::Single,
                        FeatureSource::Association {
                            corpus: corpus.clone(),
                            measure,
                        },
                    ));
                }
            }
        }
        FeatureSchema { task, features }
    }

    /// Rebuilds a schema from column names, checking uniqueness and that
    /// aggregations agree with the task.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<FeatureSchema> {
        let features = names
            .iter()
            .map(|n| FeatureDescriptor::parse(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let multi = features
            .iter()
            .any(|f| f.aggregation != Aggregation::Single || f.group == FeatureGroup::Association);
        let single_lex = features.iter().any(|f| {
            f.aggregation == Aggregation::Single
                && matches!(
                    f.source,
                    FeatureSource::Lexicon(_) | FeatureSource::CorpusFrequency(_)
                )
        });
        if multi && single_lex {
            return Err(Error::Config(
                "schema mixes single-word and two-word lexicon features".into(),
            ));
        }
        let schema = FeatureSchema {
            task: if multi {
                TaskKind::Multi
            } else {
                TaskKind::Single
            },
            features,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for f in &self.features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::Config(format!("duplicate feature {:?}", f.name)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn groups(&self) -> Vec<FeatureGroup> {
        let mut g: Vec<FeatureGroup> = self.features.iter().map(|f| f.group).collect();
        g.sort();
        g.dedup();
        g
    }

    /// Indices of the columns whose group satisfies `keep`.
    pub fn column_indices(&self, keep: impl Fn(FeatureGroup) -> bool) -> Vec<usize> {
        self.features
            .iter()
            .enumerate()
            .filter(|(_, f)| keep(f.group))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn select(&self, columns: &[usize]) -> FeatureSchema {
        FeatureSchema {
            task: self.task,
            features: columns.iter().map(|&c| self.features[c].clone()).collect(),
        }
    }
}
