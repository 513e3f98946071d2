use serde::Serialize;

use crate::ingest::{Rule, SampleTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverEntry {
    pub rule: usize,
    pub label: usize,
    pub weight: f64,
}

/// Which rules cover which samples, indexed both ways. Rules are addressed
/// by their position in the rule list the index was built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageIndex {
    pub by_sample: Vec<Vec<CoverEntry>>,
    pub by_rule: Vec<Vec<usize>>,
    pub rule_labels: Vec<usize>,
    pub rule_weights: Vec<f64>,
}

impl CoverageIndex {
    pub fn n_samples(&self) -> usize {
        self.by_sample.len()
    }

    pub fn n_rules(&self) -> usize {
        self.by_rule.len()
    }

    pub fn covering(&self, sample: usize) -> &[CoverEntry] {
        &self.by_sample[sample]
    }

    pub fn covered(&self, rule: usize) -> &[usize] {
        &self.by_rule[rule]
    }
}

pub fn build_coverage(rules: &[Rule], samples: &SampleTable) -> CoverageIndex {
    let mut by_sample = vec![Vec::new(); samples.len()];
    let mut by_rule = Vec::with_capacity(rules.len());
    for (j, rule) in rules.iter().enumerate() {
        let covered: Vec<usize> = samples
            .samples
            .iter()
            .enumerate()
            .filter(|(_, s)| rule.covers(s))
            .map(|(i, _)| i)
            .collect();
        for &i in &covered {
            by_sample[i].push(CoverEntry { rule: j, label: rule.label, weight: rule.weight });
        }
        by_rule.push(covered);
    }
    CoverageIndex {
        by_sample,
        by_rule,
        rule_labels: rules.iter().map(|r| r.label).collect(),
        rule_weights: rules.iter().map(|r| r.weight).collect(),
    }
}
