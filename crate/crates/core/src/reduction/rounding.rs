use std::cmp::Ordering;

use super::problem::ReductionProblem;

/// Values at or below this are treated as zero when rounding.
pub const ZERO_TOL: f64 = 1e-9;

fn quantize(v: f64) -> i64 {
    (v / ZERO_TOL).round() as i64
}

/// Top-`budget` positions by `z`, ties by higher score then lower id.
/// Positions with `z` numerically zero are never chosen. The result is
/// sorted by position.
pub fn round_top(z: &[f64], scores: &[f64], ids: &[usize], budget: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..z.len()).filter(|&j| z[j] > ZERO_TOL).collect();
    order.sort_by(|&a, &b| {
        quantize(z[b])
            .cmp(&quantize(z[a]))
            .then_with(|| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal))
            .then_with(|| ids[a].cmp(&ids[b]))
    });
    order.truncate(budget);
    order.sort_unstable();
    order
}

/// Deterministic rounding of a fractional solution. Forced positions are
/// always kept; the remaining budget goes to the best of the rest.
pub fn round_selection(z: &[f64], problem: &ReductionProblem) -> Vec<usize> {
    let forced = problem.is_forced();
    let free_z: Vec<f64> = z.iter().enumerate().map(|(j, &v)| if forced[j] { 0.0 } else { v }).collect();
    let mut chosen = round_top(&free_z, &problem.scores, &problem.rule_ids, problem.free_budget());
    chosen.extend_from_slice(&problem.forced);
    chosen.sort_unstable();
    chosen.dedup();
    chosen
}
