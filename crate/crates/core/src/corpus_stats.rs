//! Tokenization and unigram/bigram frequency counting.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lowercased, nonempty word form without internal whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(String);

impl Token {
    /// Normalizes `raw` into a token, or `None` if nothing survives
    /// punctuation stripping.
    pub fn new(raw: &str) -> Option<Token> {
        let lower = raw.to_lowercase();
        let trimmed = lower.trim_matches(is_punct);
        if trimmed.is_empty() || trimmed.chars().any(char::is_whitespace) {
            None
        } else {
            Some(Token(trimmed.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'
                | '\u{2019}'
                | '\u{201A}'
                | '\u{201C}'
                | '\u{201D}'
                | '\u{201E}'
                | '\u{00AB}'
                | '\u{00BB}'
                | '\u{2013}'
                | '\u{2014}'
                | '\u{2026}'
                | '\u{00BF}'
                | '\u{00A1}'
                | '\u{2032}'
                | '\u{2033}'
                | '\u{2022}'
                | '\u{00B7}'
        )
}

/// Splits on Unicode whitespace, strips leading/trailing punctuation from
/// each piece and lowercases. Internal hyphens and apostrophes survive.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace().filter_map(Token::new).collect()
}

/// Unigram and adjacent-bigram counts over a tokenized corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyModel {
    unigrams: HashMap<String, u64>,
    bigrams: HashMap<(String, String), u64>,
    total_unigrams: u64,
    total_bigrams: u64,
    sentences: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CountMeta {
    total_unigrams: u64,
    total_bigrams: u64,
    sentences: u64,
}

impl FrequencyModel {
    pub fn unigram(&self, form: &str) -> u64 {
        self.unigrams.get(form).copied().unwrap_or(0)
    }

    pub fn bigram(&self, first: &str, second: &str) -> u64 {
        // HashMap<(String, String), _> cannot be queried by (&str, &str)
        // without allocating; bigram lookups are not hot enough to matter.
        self.bigrams
            .get(&(first.to_string(), second.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn total_unigrams(&self) -> u64 {
        self.total_unigrams
    }

    pub fn total_bigrams(&self) -> u64 {
        self.total_bigrams
    }

    /// Number of nonempty sentences counted.
    pub fn sentences(&self) -> u64 {
        self.sentences
    }

    pub fn unigram_counts(&self) -> &HashMap<String, u64> {
        &self.unigrams
    }

    pub fn bigram_counts(&self) -> &HashMap<(String, String), u64> {
        &self.bigrams
    }

    fn add_sentence<T: AsRef<str>>(&mut self, sentence: &[T]) {
        if sentence.is_empty() {
            return;
        }
        self.sentences += 1;
        for tok in sentence {
            *self.unigrams.entry(tok.as_ref().to_string()).or_insert(0) += 1;
        }
        for pair in sentence.windows(2) {
            let key = (pair[0].as_ref().to_string(), pair[1].as_ref().to_string());
            *self.bigrams.entry(key).or_insert(0) += 1;
        }
        self.total_unigrams += sentence.len() as u64;
        self.total_bigrams += sentence.len() as u64 - 1;
    }

    fn merge(mut self, other: FrequencyModel) -> FrequencyModel {
        for (k, v) in other.unigrams {
            *self.unigrams.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.bigrams {
            *self.bigrams.entry(k).or_insert(0) += v;
        }
        self.total_unigrams += other.total_unigrams;
        self.total_bigrams += other.total_bigrams;
        self.sentences += other.sentences;
        self
    }

    /// Writes `<prefix>.unigrams.tsv`, `<prefix>.bigrams.tsv` and
    /// `<prefix>.meta.json`. Rows are sorted by form so dumps are stable.
    pub fn dump(&self, prefix: &Path) -> Result<()> {
        let (uni_path, bi_path, meta_path) = dump_paths(prefix);

        let mut uni: Vec<_> = self.unigrams.iter().collect();
        uni.sort();
        let mut w = BufWriter::new(File::create(&uni_path)?);
        writeln!(w, "form\tcount")?;
        for (form, count) in uni {
            writeln!(w, "{form}\t{count}")?;
        }
        w.flush()?;

        let mut bi: Vec<_> = self.bigrams.iter().collect();
        bi.sort();
        let mut w = BufWriter::new(File::create(&bi_path)?);
        writeln!(w, "form1\tform2\tcount")?;
        for ((a, b), count) in bi {
            writeln!(w, "{a}\t{b}\t{count}")?;
        }
        w.flush()?;

        let meta = CountMeta {
            total_unigrams: self.total_unigrams,
            total_bigrams: self.total_bigrams,
            sentences: self.sentences,
        };
        std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    /// Loads a dump written by [`FrequencyModel::dump`]. Totals are taken
    /// from the sidecar metadata and checked against the count files.
    pub fn load(prefix: &Path) -> Result<FrequencyModel> {
        let (uni_path, bi_path, meta_path) = dump_paths(prefix);
        let meta_text =
            std::fs::read_to_string(&meta_path).map_err(|e| Error::resource(&meta_path, e))?;
        let meta: CountMeta = serde_json::from_str(&meta_text)?;

        let mut model = FrequencyModel {
            total_unigrams: meta.total_unigrams,
            total_bigrams: meta.total_bigrams,
            sentences: meta.sentences,
            ..Default::default()
        };
        for fields in read_count_rows(&uni_path, 2)? {
            let count = parse_count(&uni_path, &fields[1])?;
            model.unigrams.insert(fields[0].clone(), count);
        }
        for fields in read_count_rows(&bi_path, 3)? {
            let count = parse_count(&bi_path, &fields[2])?;
            model
                .bigrams
                .insert((fields[0].clone(), fields[1].clone()), count);
        }

        let uni_sum: u64 = model.unigrams.values().sum();
        let bi_sum: u64 = model.bigrams.values().sum();
        if uni_sum != model.total_unigrams || bi_sum != model.total_bigrams {
            return Err(Error::format(
                meta_path.display().to_string(),
                format!(
                    "totals ({}, {}) do not match counts ({uni_sum}, {bi_sum})",
                    model.total_unigrams, model.total_bigrams
                ),
            ));
        }
        Ok(model)
    }
}

fn dump_paths(prefix: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let base = prefix.as_os_str().to_string_lossy().into_owned();
    (
        PathBuf::from(format!("{base}.unigrams.tsv")),
        PathBuf::from(format!("{base}.bigrams.tsv")),
        PathBuf::from(format!("{base}.meta.json")),
    )
}

fn read_count_rows(path: &Path, width: usize) -> Result<Vec<Vec<String>>> {
    let file = File::open(path).map_err(|e| Error::resource(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if i == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        if fields.len() != width {
            return Err(Error::format(
                path.display().to_string(),
                format!("line {}: expected {width} columns", i + 1),
            ));
        }
        rows.push(fields);
    }
    Ok(rows)
}

fn parse_count(path: &Path, field: &str) -> Result<u64> {
    field
        .parse()
        .map_err(|_| Error::format(path.display().to_string(), format!("bad count {field:?}")))
}

/// Counts every token and every adjacent within-sentence pair.
///
/// Sentences are partitioned across rayon workers and the partial maps
/// merged; integer counts make the result independent of the partition.
pub fn count_frequencies<T>(sentences: &[Vec<T>]) -> FrequencyModel
where
    T: AsRef<str> + Sync,
{
    sentences
        .par_chunks(4096)
        .map(|chunk| {
            let mut model = FrequencyModel::default();
            for s in chunk {
                model.add_sentence(s);
            }
            model
        })
        .reduce(FrequencyModel::default, FrequencyModel::merge)
}

/// Reads a one-sentence-per-line UTF-8 corpus and tokenizes every line.
pub fn read_corpus(path: &Path) -> Result<Vec<Vec<Token>>> {
    let file = File::open(path).map_err(|e| Error::resource(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        out.push(tokenize(&line?));
    }
    Ok(out)
}

/// Token count of a tokenized sentence.
pub fn sentence_length<T>(sentence: &[T]) -> usize {
    sentence.len()
}
