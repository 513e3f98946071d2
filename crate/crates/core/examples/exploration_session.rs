//! Drive an exploration session the way the HTTP service does: inspect a
//! rule, filter samples, page through the data table and zoom.
//!
//! cargo run --release -p rulelens --example exploration_session

use std::path::Path;
use std::sync::Arc;

use rulelens::ingest::ModelFormat;
use rulelens::reorder::Direction;
use rulelens::session::{OrderMode, OrderRequest, Predicate, Session};
use rulelens::{Analysis, ReduceOptions};

fn main() -> rulelens::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/credit");
    let a = Analysis::load(dir.join("rf200.json"), ModelFormat::JsonInterchange, dir.join("credit.csv"), dir.join("schema.json"))?;
    let mut session = Session::new(Arc::new(a), ReduceOptions::fixed(80, 0.7, 0.0))?;

    let p = session.order(&OrderRequest {
        sort: Some(OrderMode::Group { attribute: "PriorDefault".into() }),
        pinned: None,
        page: None,
    })?;
    println!("{} rows, groups {:?}", p.rules.len(), p.boundaries.first());

    let top = p.row_order[0];
    let detail = session.rule_detail(top)?;
    println!("rule #{top}: {} ({} covered samples)", detail.rule.text, detail.covered_samples.len());

    let filtered = session.apply_filter(vec![
        Predicate::Categories { attribute: "PriorDefault".into(), categories: vec!["PriorDefault_1".into()] },
        Predicate::Range { attribute: "Income".into(), lower: Some(500.0), upper: None },
    ])?;
    println!("class shares before {:?}, after {:?}", filtered.before.fractions, filtered.after.fractions);

    let page = session.samples(Some("Income"), Direction::Desc, 0)?;
    println!("{} covered samples; highest income row: {:?}", page.total, page.rows.first().map(|r| &r.values));

    let zoomed = session.zoom(&p.row_order[..2])?;
    println!("zoomed to depth {} with {} rows, rising columns {:?}", zoomed.depth, zoomed.rules.len(), zoomed.arrows);
    let info = session.info();
    println!("rules per label {:?}, mean anomaly {:?}", info.rules_per_label, info.mean_anomaly_score);
    Ok(())
}
