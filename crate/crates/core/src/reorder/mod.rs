//! Row and column order of the rule-by-attribute matrix.

mod columns;
mod seriation;
mod similarity;

use serde::{Deserialize, Serialize};

pub use columns::{
    group_by_attribute, rank_increase_arrows, sort_attributes, sort_rules_by_metric, AttributeOrder, Direction,
    Grouping, DEFAULT_PAGE_SIZE,
};
pub use seriation::{reorder_rules, Reordering, EXACT_LIMIT};
pub use similarity::{condition_similar, linked, score_sj, DEFAULT_TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Coverage,
    Confidence,
    Anomaly,
}

/// How the rows are currently arranged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SortMode {
    Metric { metric: Metric, direction: Direction },
    Group { attribute: usize },
    Reordered { attributes: Vec<usize> },
}

impl Default for SortMode {
    fn default() -> Self {
        SortMode::Metric { metric: Metric::Coverage, direction: Direction::Desc }
    }
}

/// Server-side mirror of the matrix view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixState {
    /// Rule ids in display order.
    pub row_order: Vec<usize>,
    pub attributes: AttributeOrder,
    pub pinned: Vec<usize>,
    pub page: usize,
    /// Nested half-open row ranges, outermost first.
    pub boundaries: Vec<Vec<(usize, usize)>>,
    pub mode: SortMode,
    pub tau: f64,
}
