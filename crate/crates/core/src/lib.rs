pub mod analysis;
pub mod anomaly;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod hierarchy;
pub mod ingest;
pub mod reduction;
pub mod reorder;
pub mod session;

pub use analysis::{Analysis, ReduceOptions, Selection, SelectionMetrics, Tuning};
pub use error::{Error, Result};
