//! Reduce the 200-tree credit-approval forest to 80 representative rules
//! with the two-stage grid search and print the resulting metrics.
//!
//! cargo run --release -p rulelens --example credit_reduction

use std::path::Path;
use std::time::Instant;

use rulelens::ingest::ModelFormat;
use rulelens::{Analysis, ReduceOptions};

fn main() -> rulelens::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/credit");
    let started = Instant::now();
    let analysis = Analysis::load(
        dir.join("rf200.json"),
        ModelFormat::JsonInterchange,
        dir.join("credit.csv"),
        dir.join("schema.json"),
    )?;
    println!(
        "{} rules from {} trees, mean anomaly score {:.4} ({:.1?})",
        analysis.n_rules(),
        analysis.ensemble.trees.len(),
        analysis.scores.mean(),
        started.elapsed()
    );
    let selection = analysis.reduce_all(&ReduceOptions::grid(80))?;
    for (xi, lambda, f) in &selection.grid_trace {
        println!("  xi={xi:.1} lambda={lambda:.1} train fidelity={f:.4}");
    }
    let m = selection.metrics;
    println!(
        "selected {} rules at xi={:?} lambda={:?}: fidelity train {:.4}, test {:.4}, anomaly {:.4} ({:.1?})",
        selection.rule_ids.len(),
        selection.xi,
        selection.lambda,
        m.fidelity_train.unwrap_or(f64::NAN),
        m.fidelity_test.unwrap_or(f64::NAN),
        m.average_anomaly_score.unwrap_or(f64::NAN),
        started.elapsed()
    );
    Ok(())
}
