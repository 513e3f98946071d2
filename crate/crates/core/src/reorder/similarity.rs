use crate::features::QuantileMaps;
use crate::ingest::{Condition, Rule};

pub const DEFAULT_TAU: f64 = 0.1;

/// Whether two rules test `attr` alike: identical category subsets, or
/// interval endpoints within `tau` of each other in quantile space. False
/// unless both rules test the attribute.
pub fn condition_similar(a: &Rule, b: &Rule, attr: usize, tau: f64, maps: &QuantileMaps) -> bool {
    match (a.conditions.get(&attr), b.conditions.get(&attr)) {
        (Some(Condition::Categories(x)), Some(Condition::Categories(y))) => x == y,
        (Some(ca @ Condition::Interval { .. }), Some(cb @ Condition::Interval { .. })) => {
            let (alo, ahi) = maps.interval(attr, ca).expect("numeric condition");
            let (blo, bhi) = maps.interval(attr, cb).expect("numeric condition");
            (alo - blo).abs() <= tau && (ahi - bhi).abs() <= tau
        }
        _ => false,
    }
}

/// Adjacent-pair indicator: same label and similar on `attr`.
pub fn linked(a: &Rule, b: &Rule, attr: usize, tau: f64, maps: &QuantileMaps) -> bool {
    a.label == b.label && condition_similar(a, b, attr, tau, maps)
}

/// Number of adjacent pairs in `order` that share a label and test `attr`
/// alike.
pub fn score_sj(order: &[&Rule], attr: usize, tau: f64, maps: &QuantileMaps) -> usize {
    order.windows(2).filter(|w| linked(w[0], w[1], attr, tau, maps)).count()
}
