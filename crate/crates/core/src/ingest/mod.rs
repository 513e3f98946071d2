//! Datasets, trained tree ensembles and their rule sets.
//!
//! Three input documents feed the engine: a JSON schema, a CSV sample table
//! and a model file (JSON interchange or a boosted-tree text dump). Every
//! leaf of every tree becomes one [`Rule`].

mod gbt_text;
mod model;
mod rules;
mod samples;
mod schema;

pub use gbt_text::parse_gbt_text;
pub use model::{
    argmax, parse_ensemble, parse_ensemble_str, parse_json_interchange, LeafValue, ModelFormat,
    ModelKind, Node, SplitTest, Tree, TreeEnsemble,
};
pub use rules::{extract_rules, Condition, Rule, RuleSource};
pub use samples::{
    load_samples, parse_samples, Sample, SampleTable, Split, LABEL_COLUMN, SPLIT_COLUMN,
};
pub use schema::{load_schema, AttributeKind, AttributeSpec, DatasetSchema, MAX_CLASSES, MIN_CLASSES};

/// Original-model prediction for one sample. Ties go to the lower class.
pub fn predict_original(ensemble: &TreeEnsemble, sample: &Sample) -> usize {
    ensemble.predict(sample)
}
