//! Parse a gradient-boosted model in the framework's text dump format and
//! list the rules it decomposes into.
//!
//! cargo run -p rulelens --example extract_rules

use std::path::Path;

use rulelens::ingest::{extract_rules, load_schema, parse_ensemble, ModelFormat};

fn main() -> rulelens::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/gbt");
    let schema = load_schema(dir.join("multiclass.schema.json"))?;
    let ensemble = parse_ensemble(dir.join("multiclass.txt"), ModelFormat::GbtText, &schema)?;
    let rules = extract_rules(&ensemble, &schema)?;
    println!("{} trees, {} classes, {} rules", ensemble.trees.len(), ensemble.n_classes, rules.len());
    for rule in rules.iter().take(8) {
        println!("  #{:<3} tree {:<2} weight {:+.4}  {}", rule.id, rule.source.tree, rule.weight, rule.describe(&schema));
    }
    Ok(())
}
