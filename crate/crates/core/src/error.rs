use std::path::PathBuf;

/// Where in an input file a problem was found.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct Location {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
}

impl Location {
    pub fn file(path: impl Into<PathBuf>) -> Self {
        Location { file: Some(path.into()), ..Default::default() }
    }

    pub fn cell(row: usize, column: impl Into<String>) -> Self {
        Location { row: Some(row), column: Some(column.into()), ..Default::default() }
    }

    pub fn node(tree: usize, node: usize) -> Self {
        Location { tree: Some(tree), node: Some(node), ..Default::default() }
    }

    pub fn with_file(mut self, path: impl Into<PathBuf>) -> Self {
        self.file = Some(path.into());
        self
    }
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if let Some(file) = &self.file {
            parts.push(file.display().to_string());
        }
        if let Some(row) = self.row {
            parts.push(format!("row {row}"));
        }
        if let Some(col) = &self.column {
            parts.push(format!("column `{col}`"));
        }
        if let Some(tree) = self.tree {
            parts.push(format!("tree {tree}"));
        }
        if let Some(node) = self.node {
            parts.push(format!("node {node}"));
        }
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The input is not well-formed (bad JSON, bad CSV syntax, bad tokens).
    #[error("parse error at {location}: {message}")]
    Parse { location: Location, message: String },

    /// The input is well-formed but inconsistent with the schema or model.
    #[error("schema mismatch at {location}: {message}")]
    Mismatch { location: Location, message: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("inconsistent rule path at {location}: {message}")]
    InconsistentPath { location: Location, message: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("LP solver failed: {message}")]
    Solver {
        message: String,
        /// Best feasible point known when the solver gave up.
        incumbent: Option<Vec<f64>>,
    },

    #[error("navigation error: {0}")]
    Navigation(String),

    #[error("not found: {0}")]
    NotFound(String),
}

impl Error {
    pub(crate) fn parse(location: Location, message: impl Into<String>) -> Self {
        Error::Parse { location, message: message.into() }
    }

    pub(crate) fn mismatch(location: Location, message: impl Into<String>) -> Self {
        Error::Mismatch { location, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Location carried by the error, if any.
    pub fn location(&self) -> Option<&Location> {
        match self {
            Error::Parse { location, .. }
            | Error::Mismatch { location, .. }
            | Error::InconsistentPath { location, .. } => Some(location),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
