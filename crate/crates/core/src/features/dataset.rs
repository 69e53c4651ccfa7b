use std::fs::File;
use std::io::Read;
use std::path::Path;

use log::warn;

use crate::corpus_stats::tokenize;
use crate::error::{Error, Result};
use crate::features::TargetInstance;

/// Reads a dataset TSV with header `id corpus sentence token [complexity]`.
/// Columns are located by header name. Gold scores outside `interval` are
/// rejected; an empty complexity field means unlabeled.
pub fn load_dataset(path: &Path, interval: (f64, f64)) -> Result<Vec<TargetInstance>> {
    let file = File::open(path).map_err(|e| Error::resource(path, e))?;
    parse_dataset(file, interval)
}

pub fn parse_dataset<R: Read>(input: R, interval: (f64, f64)) -> Result<Vec<TargetInstance>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .has_headers(true)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_lowercase())
        .collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let need = |name: &str| {
        col(name).ok_or_else(|| Error::format("dataset", format!("missing column {name:?}")))
    };
    let (id_col, corpus_col, sent_col, tok_col) = (
        need("id")?,
        need("corpus")?,
        need("sentence")?,
        need("token")?,
    );
    let gold_col = col("complexity");

    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let id = field(id_col).to_string();
        let corpus = field(corpus_col)
            .parse()
            .map_err(|e| Error::Data(format!("line {line}: {e}")))?;
        let gold = match gold_col.map(field).map(str::trim) {
            None | Some("") => None,
            Some(g) => {
                let v: f64 = g
                    .parse()
                    .map_err(|_| Error::Data(format!("line {line}: bad complexity {g:?}")))?;
                if !v.is_finite() || v < interval.0 || v > interval.1 {
                    return Err(Error::Data(format!(
                        "line {line}: complexity {v} outside [{}, {}]",
                        interval.0, interval.1
                    )));
                }
                Some(v)
            }
        };
        let instance = TargetInstance::new(
            id,
            corpus,
            tokenize(field(sent_col)),
            tokenize(field(tok_col)),
            gold,
        )
        .map_err(|e| Error::Data(format!("line {line}: {e}")))?;
        if !instance.target_in_sentence() {
            warn!(
                "line {line}: target {:?} not found in its sentence",
                instance.target_text()
            );
        }
        out.push(instance);
    }
    Ok(out)
}
