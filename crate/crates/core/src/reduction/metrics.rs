use serde::Serialize;

use super::coverage::CoverageIndex;
use super::problem::VoteModel;
use crate::error::{Error, Result};
use crate::ingest::{argmax, SampleTable};

/// Fraction of `samples` where the vote of the `selected` rules agrees with
/// the original prediction. `None` when `samples` is empty.
pub fn fidelity(
    selected: &[usize],
    coverage: &CoverageIndex,
    vote: &VoteModel,
    targets: &[usize],
    samples: &[usize],
) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut on = vec![false; coverage.n_rules()];
    for &j in selected {
        on[j] = true;
    }
    let hits = samples
        .iter()
        .filter(|&&i| {
            let mut y = vote.base_scores.clone();
            for e in coverage.covering(i).iter().filter(|e| on[e.rule]) {
                y[e.label] += e.weight;
            }
            argmax(&y) == targets[i]
        })
        .count();
    Some(hits as f64 / samples.len() as f64)
}

pub fn average_anomaly_score(selected: &[usize], scores: &[f64]) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::InvalidArgument("average anomaly score of an empty selection".into()));
    }
    Ok(selected.iter().map(|&j| scores[j]).sum::<f64>() / selected.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuleStats {
    /// Covered training samples.
    pub coverage: usize,
    /// Share of covered labelled training samples whose label matches the
    /// rule; 0 for rules covering none.
    pub confidence: f64,
}

pub fn rule_stats(rule: usize, coverage: &CoverageIndex, samples: &SampleTable) -> RuleStats {
    let label = coverage.rule_labels[rule];
    let mut covered = 0;
    let mut labelled = 0;
    let mut correct = 0;
    for &i in coverage.covered(rule) {
        let s = samples.get(i);
        if s.split != crate::ingest::Split::Train {
            continue;
        }
        covered += 1;
        if let Some(l) = s.label {
            labelled += 1;
            correct += usize::from(l == label);
        }
    }
    let confidence = if labelled == 0 { 0.0 } else { correct as f64 / labelled as f64 };
    RuleStats { coverage: covered, confidence }
}

pub fn rule_confidence(rule: usize, coverage: &CoverageIndex, samples: &SampleTable) -> f64 {
    rule_stats(rule, coverage, samples).confidence
}

pub fn rule_coverage(rule: usize, coverage: &CoverageIndex, samples: &SampleTable) -> usize {
    rule_stats(rule, coverage, samples).coverage
}
