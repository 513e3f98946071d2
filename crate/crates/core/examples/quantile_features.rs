//! Show how rule conditions become vectors: numeric bounds pass through the
//! empirical quantile map, categorical conditions become distributions.
//!
//! cargo run -p rulelens --example quantile_features

use std::path::Path;

use rulelens::features::{vectorize_rule, FeatureLayout};
use rulelens::ingest::ModelFormat;
use rulelens::Analysis;

fn main() -> rulelens::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/credit");
    let a = Analysis::load(dir.join("rf200.json"), ModelFormat::JsonInterchange, dir.join("credit.csv"), dir.join("schema.json"))?;
    let income = a.schema.attribute_index("Income").expect("credit schema has Income");
    for x in [0.0, 100.0, 500.0, 1000.0, 10000.0] {
        println!("q_Income({x}) = {:.4}", a.maps.eval(income, x));
    }
    let layout = FeatureLayout::new(&a.schema);
    let rule = &a.rules[0];
    println!("\n{}", rule.describe(&a.schema));
    let v = vectorize_rule(rule, &a.schema, &a.maps);
    for (k, spec) in a.schema.attributes.iter().enumerate() {
        let slots: Vec<String> = layout.slots(k).map(|s| format!("{:.3}", v.0[s])).collect();
        println!("  {:<15} [{}]", spec.name, slots.join(", "));
    }
    Ok(())
}
