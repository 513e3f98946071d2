//! Rank the credit forest's rules by anomaly score: how unlikely their own
//! label is given their conditions.
//!
//! cargo run --release -p rulelens --example anomaly_scores

use std::path::Path;

use rulelens::ingest::ModelFormat;
use rulelens::Analysis;

fn main() -> rulelens::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/credit");
    let a = Analysis::load(dir.join("rf200.json"), ModelFormat::JsonInterchange, dir.join("credit.csv"), dir.join("schema.json"))?;
    println!("logistic fit: {} iterations, mean score {:.4}", a.logistic.iterations, a.scores.mean());
    let mut order: Vec<usize> = (0..a.n_rules()).collect();
    order.sort_by(|&x, &y| a.scores.get(y).total_cmp(&a.scores.get(x)));
    println!("most anomalous rules:");
    for &j in order.iter().take(5) {
        let st = &a.rule_stats[j];
        println!(
            "  {:.4}  coverage {:>3} confidence {:.2}  {}",
            a.scores.get(j),
            st.coverage,
            st.confidence,
            a.rules[j].describe(&a.schema)
        );
    }
    Ok(())
}
