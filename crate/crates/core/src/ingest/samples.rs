use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schema::{AttributeKind, DatasetSchema};
use crate::error::{Error, Location, Result};

pub const LABEL_COLUMN: &str = "__label__";
pub const SPLIT_COLUMN: &str = "__split__";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One row. Categorical cells hold the category index as an exact small
/// integer in `f64`, which keeps condition checks branch-free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Vec<f64>,
    pub label: Option<usize>,
    pub split: Split,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Self {
        Sample { values, label: None, split: Split::Train }
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    pub fn value(&self, attr: usize) -> f64 {
        self.values[attr]
    }

    pub fn category(&self, attr: usize) -> usize {
        self.values[attr] as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    pub samples: Vec<Sample>,
}

impl SampleTable {
    pub fn new(samples: Vec<Sample>, schema: &DatasetSchema) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("sample table needs at least one row".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            validate_sample(s, schema).map_err(|msg| {
                Error::mismatch(Location { row: Some(i + 1), ..Default::default() }, msg)
            })?;
        }
        Ok(SampleTable { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, i: usize) -> &Sample {
        &self.samples[i]
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        self.samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.split == split)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self) -> Vec<usize> {
        self.indices(Split::Train)
    }

    pub fn test_indices(&self) -> Vec<usize> {
        self.indices(Split::Test)
    }

    /// Human-readable cell value.
    pub fn display_value(&self, schema: &DatasetSchema, row: usize, attr: usize) -> String {
        let spec = &schema.attributes[attr];
        let v = self.samples[row].values[attr];
        match spec.kind {
            AttributeKind::Numeric => format!("{v}"),
            AttributeKind::Categorical => spec.categories[v as usize].clone(),
        }
    }
}

fn validate_sample(s: &Sample, schema: &DatasetSchema) -> std::result::Result<(), String> {
    if s.values.len() != schema.n_attributes() {
        return Err(format!(
            "expected {} values, found {}",
            schema.n_attributes(),
            s.values.len()
        ));
    }
    for (spec, &v) in schema.attributes.iter().zip(&s.values) {
        match spec.kind {
            AttributeKind::Numeric if !v.is_finite() => {
                return Err(format!("non-finite value in `{}`", spec.name));
            }
            AttributeKind::Categorical => {
                if v < 0.0 || v.fract() != 0.0 || v as usize >= spec.categories.len() {
                    return Err(format!("invalid category code {v} in `{}`", spec.name));
                }
            }
            _ => {}
        }
    }
    if let Some(l) = s.label {
        if l >= schema.n_classes() {
            return Err(format!("label index {l} out of range"));
        }
    }
    Ok(())
}

/// Parse a UTF-8 CSV with a header naming every schema attribute, plus the
/// optional `__label__` and `__split__` columns. Rows are numbered from 1
/// (the first data row) in error locations.
pub fn parse_samples(text: &str, schema: &DatasetSchema) -> Result<SampleTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::parse(Location::default(), format!("cannot read header: {e}")))?
        .clone();

    let mut column_of_attr = vec![None; schema.n_attributes()];
    let mut label_col = None;
    let mut split_col = None;
    for (col, name) in headers.iter().enumerate() {
        if name == LABEL_COLUMN {
            label_col = Some(col);
        } else if name == SPLIT_COLUMN {
            split_col = Some(col);
        } else if let Some(a) = schema.attribute_index(name) {
            if column_of_attr[a].is_some() {
                return Err(Error::mismatch(
                    Location { column: Some(name.into()), ..Default::default() },
                    "column appears twice",
                ));
            }
            column_of_attr[a] = Some(col);
        } else {
            return Err(Error::mismatch(
                Location { column: Some(name.into()), ..Default::default() },
                "column is not a schema attribute",
            ));
        }
    }
    let column_of_attr: Vec<usize> = column_of_attr
        .into_iter()
        .enumerate()
        .map(|(a, c)| {
            c.ok_or_else(|| {
                Error::mismatch(
                    Location { column: Some(schema.attributes[a].name.clone()), ..Default::default() },
                    "schema attribute missing from header",
                )
            })
        })
        .collect::<Result<_>>()?;

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record
            .map_err(|e| Error::parse(Location { row: Some(row), ..Default::default() }, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(Error::parse(
                Location { row: Some(row), ..Default::default() },
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let mut values = Vec::with_capacity(schema.n_attributes());
        for (a, spec) in schema.attributes.iter().enumerate() {
            let cell = &record[column_of_attr[a]];
            if cell.is_empty() {
                return Err(Error::parse(Location::cell(row, &spec.name), "empty cell"));
            }
            let v = match spec.kind {
                AttributeKind::Numeric => match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => v,
                    _ => {
                        return Err(Error::parse(
                            Location::cell(row, &spec.name),
                            format!("`{cell}` is not a finite number"),
                        ))
                    }
                },
                AttributeKind::Categorical => match spec.category_index(cell) {
                    Some(k) => k as f64,
                    None => {
                        return Err(Error::mismatch(
                            Location::cell(row, &spec.name),
                            format!("unknown category `{cell}`"),
                        ))
                    }
                },
            };
            values.push(v);
        }
        let label = match label_col.map(|c| &record[c]) {
            None | Some("") => None,
            Some(cell) => Some(schema.class_index(cell).ok_or_else(|| {
                Error::mismatch(Location::cell(row, LABEL_COLUMN), format!("unknown class `{cell}`"))
            })?),
        };
        let split = match split_col.map(|c| &record[c]) {
            None | Some("") | Some("train") => Split::Train,
            Some("test") => Split::Test,
            Some(other) => {
                return Err(Error::parse(
                    Location::cell(row, SPLIT_COLUMN),
                    format!("split must be `train` or `test`, found `{other}`"),
                ))
            }
        };
        samples.push(Sample { values, label, split });
    }
    if samples.is_empty() {
        return Err(Error::parse(Location::default(), "dataset has no rows"));
    }
    Ok(SampleTable { samples })
}

pub fn load_samples(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<SampleTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples(&text, schema).map_err(|e| match e {
        Error::Parse { location, message } => {
            Error::Parse { location: location.with_file(path), message }
        }
        Error::Mismatch { location, message } => {
            Error::Mismatch { location: location.with_file(path), message }
        }
        other => other,
    })
}
