//! Compare the anomaly-biased reduction against random rule subsets of the
//! same size.
//!
//! cargo run --release -p rulelens --example baseline_evaluation

use std::path::Path;

use rulelens::evaluation::evaluate;
use rulelens::ingest::ModelFormat;
use rulelens::{Analysis, ReduceOptions};

fn main() -> rulelens::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/credit");
    let a = Analysis::load(dir.join("rf200.json"), ModelFormat::JsonInterchange, dir.join("credit.csv"), dir.join("schema.json"))?;
    let report = evaluate(&a, &ReduceOptions::fixed(80, 0.7, 0.0), 5, 0)?;
    for m in &report.methods {
        println!(
            "{:<15} fidelity train {:.4} test {:.4}  anomaly {:.4}",
            m.method,
            m.mean_fidelity_train.unwrap_or(f64::NAN),
            m.mean_fidelity_test.unwrap_or(f64::NAN),
            m.mean_average_anomaly_score.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
