use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureSchema};

/// Row-major feature values; `None` is a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub schema: FeatureSchema,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub targets: Option<Vec<f64>>,
}

impl FeatureMatrix {
    /// Builds a matrix from raw parts, checking shapes.
    pub fn new(
        schema: FeatureSchema,
        rows: Vec<Vec<Option<f64>>>,
        targets: Option<Vec<f64>>,
    ) -> Result<FeatureMatrix> {
        if let Some(bad) = rows.iter().position(|r| r.len() != schema.len()) {
            return Err(Error::Data(format!(
                "row {bad} has {} cells, schema has {}",
                rows[bad].len(),
                schema.len()
            )));
        }
        if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Data(
                "feature values must be finite or missing".into(),
            ));
        }
        if let Some(t) = &targets {
            if t.len() != rows.len() {
                return Err(Error::Data(format!(
                    "{} targets for {} rows",
                    t.len(),
                    rows.len()
                )));
            }
        }
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Ok(FeatureMatrix {
            schema,
            ids,
            rows,
            targets,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn column(&self, j: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            schema: self.schema.clone(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: self
                .targets
                .as_ref()
                .map(|t| idx.iter().map(|&i| t[i]).collect()),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            schema: self.schema.select(cols),
            ids: self.ids.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| cols.iter().map(|&c| r[c]).collect())
                .collect(),
            targets: self.targets.clone(),
        }
    }

    pub fn without_groups(&self, groups: &[FeatureGroup]) -> FeatureMatrix {
        self.select_columns(&self.schema.column_indices(|g| !groups.contains(&g)))
    }

    pub fn only_groups(&self, groups: &[FeatureGroup]) -> FeatureMatrix {
        self.select_columns(&self.schema.column_indices(|g| groups.contains(&g)))
    }

    /// TSV dump: header of schema names, one row per instance, empty field
    /// for missing values.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.schema.names().join("\t"))?;
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
                .collect();
            writeln!(out, "{}", line.join("\t"))?;
        }
        Ok(())
    }

    /// Reads a dump written by [`FeatureMatrix::write_tsv`]. The result has
    /// no targets and positional ids.
    pub fn read_tsv<R: Read>(input: R) -> Result<FeatureMatrix> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .quoting(false)
            .has_headers(true)
            .from_reader(input);
        let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let schema = if names.len() == 1 && names[0].is_empty() {
            FeatureSchema::from_names::<String>(&[])?
        } else {
            FeatureSchema::from_names(&names)?
        };
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    if f.is_empty() {
                        Ok(None)
                    } else {
                        f.parse::<f64>().map(Some).map_err(|_| {
                            Error::format(
                                "feature matrix",
                                format!("row {}: bad value {f:?}", i + 1),
                            )
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        FeatureMatrix::new(schema, rows, None)
    }
}
