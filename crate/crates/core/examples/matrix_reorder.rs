//! Arrange the displayed rules: sort columns by usage, group rows on one
//! attribute, then reorder on two attributes so alike conditions sit
//! together.
//!
//! cargo run --release -p rulelens --example matrix_reorder

use std::path::Path;

use rulelens::ingest::ModelFormat;
use rulelens::reorder::{group_by_attribute, reorder_rules, score_sj, sort_attributes, DEFAULT_TAU};
use rulelens::{Analysis, ReduceOptions};

fn main() -> rulelens::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/credit");
    let a = Analysis::load(dir.join("rf200.json"), ModelFormat::JsonInterchange, dir.join("credit.csv"), dir.join("schema.json"))?;
    let selection = a.reduce_all(&ReduceOptions::fixed(80, 0.7, 0.0))?;
    let rules: Vec<_> = selection.rule_ids.iter().map(|&j| &a.rules[j]).collect();

    let columns = sort_attributes(&rules, a.schema.n_attributes(), &[], 15);
    let names: Vec<&str> = columns.order.iter().map(|&k| a.schema.attributes[k].name.as_str()).collect();
    println!("columns: {}", names.join(", "));

    let prior = a.schema.attribute_index("PriorDefault").expect("credit schema has PriorDefault");
    let income = a.schema.attribute_index("Income").expect("credit schema has Income");
    let grouped = group_by_attribute(&rules, prior, DEFAULT_TAU, &a.maps);
    println!("PriorDefault groups (row ranges): {:?}", grouped.groups);

    let before = [score_sj(&rules, prior, DEFAULT_TAU, &a.maps), score_sj(&rules, income, DEFAULT_TAU, &a.maps)];
    let out = reorder_rules(&rules, &[prior, income], DEFAULT_TAU, &a.maps);
    let ordered: Vec<_> = out.order.iter().map(|&j| &a.rules[j]).collect();
    let after = [score_sj(&ordered, prior, DEFAULT_TAU, &a.maps), score_sj(&ordered, income, DEFAULT_TAU, &a.maps)];
    println!("adjacent alike pairs (PriorDefault, Income): {before:?} -> {after:?}");
    Ok(())
}
