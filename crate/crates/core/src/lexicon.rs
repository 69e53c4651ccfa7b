//! External word lists and the two-step (surface form, then lemma) lookup.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which family of word lists a table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconGroup {
    Frequency,
    Norm,
    Psychometric,
}

impl LexiconGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            LexiconGroup::Frequency => "frequency",
            LexiconGroup::Norm => "norm",
            LexiconGroup::Psychometric => "psychometric",
        }
    }
}

impl fmt::Display for LexiconGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LexiconGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frequency" => Ok(LexiconGroup::Frequency),
            "norm" => Ok(LexiconGroup::Norm),
            "psychometric" => Ok(LexiconGroup::Psychometric),
            other => Err(Error::Config(format!("unknown lexicon group {other:?}"))),
        }
    }
}

/// One numeric column of a word list, keyed by lowercase form.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconTable {
    pub name: String,
    pub group: LexiconGroup,
    entries: HashMap<String, f64>,
}

impl LexiconTable {
    /// Builds a table from in-memory pairs. Keys are lowercased; the first
    /// occurrence of a key wins; empty keys and non-finite values are dropped.
    pub fn from_pairs<K, I>(name: impl Into<String>, group: LexiconGroup, pairs: I) -> Self
    where
        K: AsRef<str>,
        I: IntoIterator<Item = (K, f64)>,
    {
        let mut entries = HashMap::new();
        for (k, v) in pairs {
            let key = k.as_ref().trim().to_lowercase();
            if key.is_empty() || !v.is_finite() {
                continue;
            }
            entries.entry(key).or_insert(v);
        }
        LexiconTable {
            name: name.into(),
            group,
            entries,
        }
    }

    pub fn get(&self, form: &str) -> Option<f64> {
        self.entries.get(form).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Two-step resolution: the surface form if listed, else the lemma.
    pub fn lookup(&self, surface: &str, lemma: Option<&str>) -> Option<f64> {
        self.get(surface)
            .or_else(|| lemma.and_then(|l| self.get(l)))
    }
}

/// Loads column `value_column` of a TSV keyed by column `key_column`
/// (both zero-based). The first line is a header and is skipped.
pub fn load_lexicon(
    path: &Path,
    name: &str,
    group: LexiconGroup,
    key_column: usize,
    value_column: usize,
) -> Result<LexiconTable> {
    let file = File::open(path).map_err(|e| Error::resource(path, e))?;
    let mut entries: HashMap<String, f64> = HashMap::new();
    let mut skipped = 0usize;

    for (lineno, line) in BufReader::new(file).lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (Some(key), Some(value)) = (fields.get(key_column), fields.get(value_column)) else {
            skipped += 1;
            continue;
        };
        let key = key.trim().to_lowercase();
        let value = match value.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && !key.is_empty() => v,
            _ => {
                skipped += 1;
                continue;
            }
        };
        if entries.contains_key(&key) {
            warn!(
                "{}:{}: duplicate key {key:?} in {name}, keeping first value",
                path.display(),
                lineno + 1
            );
            continue;
        }
        entries.insert(key, value);
    }

    if skipped > 0 {
        warn!(
            "{}: skipped {skipped} unparsable rows for {name}",
            path.display()
        );
    }
    if entries.is_empty() {
        return Err(Error::format(
            path.display().to_string(),
            format!("no parsable rows for column {value_column}"),
        ));
    }
    Ok(LexiconTable {
        name: name.to_string(),
        group,
        entries,
    })
}

/// Surface form → lemma mapping, standing in for a lemmatizer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaDictionary {
    entries: HashMap<String, String>,
}

impl LemmaDictionary {
    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut entries = HashMap::new();
        for (s, l) in pairs {
            let s = s.as_ref().trim().to_lowercase();
            let l = l.as_ref().trim().to_lowercase();
            if !s.is_empty() && !l.is_empty() {
                entries.entry(s).or_insert(l);
            }
        }
        LemmaDictionary { entries }
    }

    /// Reads a `surface<TAB>lemma` TSV with a header row.
    pub fn load(path: &Path) -> Result<LemmaDictionary> {
        let file = File::open(path).map_err(|e| Error::resource(path, e))?;
        let mut pairs = Vec::new();
        for line in BufReader::new(file).lines().skip(1) {
            let line = line?;
            let mut it = line.split('\t');
            if let (Some(s), Some(l)) = (it.next(), it.next()) {
                pairs.push((s.to_string(), l.to_string()));
            }
        }
        Ok(LemmaDictionary::from_pairs(pairs))
    }

    /// The lemma of `surface`; unknown forms are their own lemma.
    pub fn lemma<'a>(&'a self, surface: &'a str) -> &'a str {
        self.entries
            .get(surface)
            .map(String::as_str)
            .unwrap_or(surface)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One table entry of a resource manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconSpec {
    pub name: String,
    pub group: LexiconGroup,
    pub path: PathBuf,
    #[serde(default)]
    pub key_column: usize,
    #[serde(default = "default_value_column")]
    pub value_column: usize,
}

fn default_value_column() -> usize {
    1
}

/// A reference corpus given as a count dump prefix (see
/// [`FrequencyModel::dump`](crate::corpus_stats::FrequencyModel::dump)).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub name: String,
    pub counts: PathBuf,
}

/// JSON resource manifest. Relative paths resolve against the manifest's
/// own directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub lexicons: Vec<LexiconSpec>,
    #[serde(default)]
    pub lemmas: Option<PathBuf>,
    #[serde(default)]
    pub corpora: Vec<CorpusSpec>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
        let mut manifest: Manifest = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for l in &mut manifest.lexicons {
            l.path = base.join(&l.path);
        }
        if let Some(p) = manifest.lemmas.as_mut() {
            *p = base.join(&*p);
        }
        for c in &mut manifest.corpora {
            c.counts = base.join(&c.counts);
        }
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_tsv(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn load_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tsv(dir.path(), "a.tsv", "word\tvalue\ncat\t5.0\ndog\t3.0\n");
        let t = load_lexicon(&p, "t", LexiconGroup::Frequency, 0, 1).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("cat"), Some(5.0));
        assert_eq!(t.get("dog"), Some(3.0));
    }

    #[test]
    fn duplicate_keeps_first() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tsv(dir.path(), "a.tsv", "word\tvalue\ncat\t5.0\nCat\t9.0\n");
        let t = load_lexicon(&p, "t", LexiconGroup::Norm, 0, 1).unwrap();
        assert_eq!(t.get("cat"), Some(5.0));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn non_numeric_rows_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tsv(
            dir.path(),
            "a.tsv",
            "word\tvalue\ncat\tn/a\ndog\t3.0\nowl\tNaN\n",
        );
        let t = load_lexicon(&p, "t", LexiconGroup::Norm, 0, 1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get("cat"), None);
    }

    #[test]
    fn selectable_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tsv(dir.path(), "g.tsv", "aoa\tword\tfam\n4.1\tCat\t6.2\n");
        let t = load_lexicon(&p, "fam", LexiconGroup::Norm, 1, 2).unwrap();
        assert_eq!(t.get("cat"), Some(6.2));
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let missing = load_lexicon(&dir.path().join("x.tsv"), "t", LexiconGroup::Norm, 0, 1);
        assert!(matches!(missing, Err(Error::Resource { .. })));
        let p = write_tsv(dir.path(), "a.tsv", "word\tvalue\ncat\t?\n");
        let empty = load_lexicon(&p, "t", LexiconGroup::Norm, 0, 1);
        assert!(matches!(empty, Err(Error::Format { .. })));
    }

    #[test]
    fn lookup_examples() {
        let t = LexiconTable::from_pairs("t", LexiconGroup::Frequency, [("cat", 5.0)]);
        assert_eq!(t.lookup("cat", None), Some(5.0));
        assert_eq!(t.lookup("cats", Some("cat")), Some(5.0));
        assert_eq!(t.lookup("dog", Some("dog")), None);
    }

    #[test]
    fn surface_shadows_lemma() {
        let t = LexiconTable::from_pairs("t", LexiconGroup::Norm, [("cats", 1.0), ("cat", 5.0)]);
        assert_eq!(t.lookup("cats", Some("cat")), Some(1.0));
    }

    #[test]
    fn lemma_dictionary_falls_back_to_surface() {
        let d = LemmaDictionary::from_pairs([("cats", "cat"), ("Went", "go")]);
        assert_eq!(d.lemma("cats"), "cat");
        assert_eq!(d.lemma("went"), "go");
        assert_eq!(d.lemma("dog"), "dog");
    }

    #[test]
    fn manifest_paths_are_relative_to_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tsv(
            dir.path(),
            "m.json",
            r#"{"lexicons":[{"name":"f","group":"frequency","path":"f.tsv"}],
                "lemmas":"lem.tsv","corpora":[{"name":"toy","counts":"counts/toy"}]}"#,
        );
        let m = Manifest::load(&p).unwrap();
        assert_eq!(m.lexicons[0].path, dir.path().join("f.tsv"));
        assert_eq!(m.lexicons[0].value_column, 1);
        assert_eq!(m.lemmas.unwrap(), dir.path().join("lem.tsv"));
        assert_eq!(m.corpora[0].counts, dir.path().join("counts/toy"));
    }

    proptest! {
        #[test]
        fn lookup_is_pure(
            entries in prop::collection::vec(("[a-d]{1,2}", -10.0f64..10.0), 0..10),
            surface in "[a-d]{1,2}",
            lemma in prop::option::of("[a-d]{1,2}"),
        ) {
            let t = LexiconTable::from_pairs("t", LexiconGroup::Norm, entries);
            let first = t.lookup(&surface, lemma.as_deref());
            prop_assert_eq!(first, t.lookup(&surface, lemma.as_deref()));
            if let Some(v) = t.get(&surface) {
                prop_assert_eq!(first, Some(v));
            }
        }
    }
}
