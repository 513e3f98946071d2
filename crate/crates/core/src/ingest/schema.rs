use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};

pub const MIN_CLASSES: usize = 2;
pub const MAX_CLASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl AttributeSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeSpec { name: name.into(), kind: AttributeKind::Numeric, categories: Vec::new() }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Categorical,
            categories: categories.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.kind == AttributeKind::Numeric
    }

    pub fn category_index(&self, value: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == value)
    }
}

/// Ordered attributes and class labels shared by a dataset and a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub attributes: Vec<AttributeSpec>,
    pub classes: Vec<String>,
}

impl DatasetSchema {
    pub fn new(attributes: Vec<AttributeSpec>, classes: Vec<String>) -> Result<Self> {
        let schema = DatasetSchema { attributes, classes };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let schema: DatasetSchema = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                Location { row: Some(e.line()), ..Default::default() },
                format!("malformed schema document: {e}"),
            )
        })?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for attr in &self.attributes {
            if attr.name.is_empty() {
                return Err(Error::InvalidSchema("attribute with empty name".into()));
            }
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate attribute `{}`", attr.name)));
            }
            match attr.kind {
                AttributeKind::Categorical => {
                    if attr.categories.len() < 2 {
                        return Err(Error::InvalidSchema(format!(
                            "categorical attribute `{}` needs at least 2 categories",
                            attr.name
                        )));
                    }
                    let unique: HashSet<_> = attr.categories.iter().collect();
                    if unique.len() != attr.categories.len() {
                        return Err(Error::InvalidSchema(format!(
                            "categorical attribute `{}` repeats a category",
                            attr.name
                        )));
                    }
                }
                AttributeKind::Numeric => {
                    if !attr.categories.is_empty() {
                        return Err(Error::InvalidSchema(format!(
                            "numeric attribute `{}` must not list categories",
                            attr.name
                        )));
                    }
                }
            }
        }
        if self.classes.len() < MIN_CLASSES {
            return Err(Error::InvalidSchema(format!(
                "need at least {MIN_CLASSES} classes, found {}",
                self.classes.len()
            )));
        }
        if self.classes.len() > MAX_CLASSES {
            return Err(Error::InvalidSchema(format!(
                "at most {MAX_CLASSES} classes are supported, found {}",
                self.classes.len()
            )));
        }
        let unique: HashSet<_> = self.classes.iter().collect();
        if unique.len() != self.classes.len() {
            return Err(Error::InvalidSchema("duplicate class label".into()));
        }
        Ok(())
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }
}

pub fn load_schema(path: impl AsRef<Path>) -> Result<DatasetSchema> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DatasetSchema::from_json_str(&text).map_err(|e| match e {
        Error::Parse { location, message } => {
            Error::Parse { location: location.with_file(path), message }
        }
        other => other,
    })
}
