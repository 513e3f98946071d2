//! Build the root level, zoom into two representatives, then step back.
//!
//! cargo run --release -p rulelens --example hierarchy_zoom

use std::path::Path;

use rulelens::hierarchy::{HierarchyLevel, Navigator};
use rulelens::ingest::ModelFormat;
use rulelens::{Analysis, ReduceOptions};

fn show(a: &Analysis, level: &HierarchyLevel) {
    println!(
        "depth {}: {} representatives over {} rules and {} training samples, fidelity {:?}",
        level.depth,
        level.representatives.len(),
        level.scope_rules().len(),
        level.train_samples.len(),
        level.metrics.fidelity_train
    );
    for &j in level.representatives.iter().take(3) {
        println!("  #{j} (+{} hidden) {}", level.hidden_of(j).len(), a.rules[j].describe(&a.schema));
    }
}

fn main() -> rulelens::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/credit");
    let a = Analysis::load(dir.join("rf200.json"), ModelFormat::JsonInterchange, dir.join("credit.csv"), dir.join("schema.json"))?;
    let mut nav = Navigator::new(&a, ReduceOptions::fixed(20, 0.7, 0.0))?;
    show(&a, nav.current());
    let picked: Vec<usize> = nav.current().representatives[..2].to_vec();
    nav.zoom_in(&a, &picked)?;
    show(&a, nav.current());
    nav.zoom_out()?;
    println!("back at depth {}", nav.depth());
    Ok(())
}
