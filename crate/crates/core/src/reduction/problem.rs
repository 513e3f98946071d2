use serde::Serialize;

use super::coverage::CoverageIndex;
use crate::error::{Error, Result};
use crate::ingest::argmax;

/// How rule votes combine into per-class scores: forests start from zero,
/// boosted models from their base scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoteModel {
    pub n_classes: usize,
    pub base_scores: Vec<f64>,
}

impl VoteModel {
    pub fn zeros(n_classes: usize) -> Self {
        VoteModel { n_classes, base_scores: vec![0.0; n_classes] }
    }
}

/// One subset-selection instance: candidate rules, the samples whose
/// original predictions they should reproduce, and the knobs `M`, `xi`,
/// `lambda`. Rules and samples are addressed by position; `rule_ids` maps
/// positions back to rule ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionProblem {
    pub vote: VoteModel,
    pub rule_ids: Vec<usize>,
    pub rule_labels: Vec<usize>,
    pub rule_weights: Vec<f64>,
    pub scores: Vec<f64>,
    /// Original-model label of each sample.
    pub targets: Vec<usize>,
    /// Positions of the candidate rules covering each sample.
    pub covering: Vec<Vec<usize>>,
    pub budget: usize,
    pub xi: f64,
    pub lambda: f64,
    /// Positions whose `z` is fixed to 1. The budget binds the other rules
    /// to `budget - forced.len()` picks.
    pub forced: Vec<usize>,
}

impl ReductionProblem {
    /// Restrict a coverage index to `rule_ids` x `sample_ids`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_coverage(
        coverage: &CoverageIndex,
        vote: &VoteModel,
        rule_ids: &[usize],
        sample_ids: &[usize],
        all_targets: &[usize],
        all_scores: &[f64],
        budget: usize,
        forced_ids: &[usize],
    ) -> Result<Self> {
        let mut position = vec![usize::MAX; coverage.n_rules()];
        for (p, &id) in rule_ids.iter().enumerate() {
            if id >= coverage.n_rules() {
                return Err(Error::InvalidArgument(format!("unknown rule id {id}")));
            }
            position[id] = p;
        }
        let covering = sample_ids
            .iter()
            .map(|&i| {
                coverage
                    .covering(i)
                    .iter()
                    .map(|e| position[e.rule])
                    .filter(|&p| p != usize::MAX)
                    .collect()
            })
            .collect();
        let forced = forced_ids
            .iter()
            .map(|&id| match position.get(id) {
                Some(&p) if p != usize::MAX => Ok(p),
                _ => Err(Error::InvalidArgument(format!("forced rule {id} is not a candidate"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let problem = ReductionProblem {
            vote: vote.clone(),
            rule_ids: rule_ids.to_vec(),
            rule_labels: rule_ids.iter().map(|&id| coverage.rule_labels[id]).collect(),
            rule_weights: rule_ids.iter().map(|&id| coverage.rule_weights[id]).collect(),
            scores: rule_ids.iter().map(|&id| all_scores[id]).collect(),
            targets: sample_ids.iter().map(|&i| all_targets[i]).collect(),
            covering,
            budget,
            xi: 0.0,
            lambda: 0.0,
            forced,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.n_rules();
        if self.budget == 0 {
            return Err(Error::InvalidArgument("budget M must be at least 1".into()));
        }
        if !(self.xi >= 0.0) || !(self.lambda >= 0.0) {
            return Err(Error::InvalidArgument("xi and lambda must be non-negative".into()));
        }
        if self.rule_labels.len() != m || self.rule_weights.len() != m || self.scores.len() != m {
            return Err(Error::InvalidArgument("rule arrays disagree in length".into()));
        }
        if self.targets.len() != self.covering.len() {
            return Err(Error::InvalidArgument("sample arrays disagree in length".into()));
        }
        let c = self.vote.n_classes;
        if self.targets.iter().chain(&self.rule_labels).any(|&l| l >= c) {
            return Err(Error::InvalidArgument("class label out of range".into()));
        }
        if self.covering.iter().flatten().chain(&self.forced).any(|&p| p >= m) {
            return Err(Error::InvalidArgument("rule position out of range".into()));
        }
        Ok(())
    }

    pub fn n_rules(&self) -> usize {
        self.rule_ids.len()
    }

    pub fn n_samples(&self) -> usize {
        self.targets.len()
    }

    pub fn with_params(&self, xi: f64, lambda: f64) -> Self {
        ReductionProblem { xi, lambda, ..self.clone() }
    }

    pub fn is_forced(&self) -> Vec<bool> {
        let mut f = vec![false; self.n_rules()];
        for &p in &self.forced {
            f[p] = true;
        }
        f
    }

    /// Budget left for rules that are not forced in.
    pub fn free_budget(&self) -> usize {
        self.budget.saturating_sub(self.forced.len())
    }

    /// Fraction of samples whose argmax vote under `z` equals the target.
    pub fn agreement(&self, z: &[f64]) -> f64 {
        if self.n_samples() == 0 {
            return 1.0;
        }
        let hits = (0..self.n_samples())
            .filter(|&i| argmax(&vote_scores(z, self, i)) == self.targets[i])
            .count();
        hits as f64 / self.n_samples() as f64
    }

    pub fn indicator(&self, positions: &[usize]) -> Vec<f64> {
        let mut z = vec![0.0; self.n_rules()];
        for &p in positions {
            z[p] = 1.0;
        }
        z
    }
}

/// Per-class prediction scores of sample `i` under rule weights `z`.
pub fn vote_scores(z: &[f64], problem: &ReductionProblem, i: usize) -> Vec<f64> {
    let mut y = problem.vote.base_scores.clone();
    for &j in &problem.covering[i] {
        y[problem.rule_labels[j]] += z[j] * problem.rule_weights[j];
    }
    y
}

/// Multi-class hinge loss with margin `xi`.
pub fn hinge_loss(scores: &[f64], label: usize, xi: f64) -> f64 {
    let rival = scores
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != label)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    (xi - (scores[label] - rival)).max(0.0)
}

/// Mean hinge loss minus the anomaly reward `lambda / M * sum(z * s)`.
pub fn objective(z: &[f64], problem: &ReductionProblem) -> f64 {
    let n = problem.n_samples();
    let hinge = if n == 0 {
        0.0
    } else {
        (0..n)
            .map(|i| hinge_loss(&vote_scores(z, problem, i), problem.targets[i], problem.xi))
            .sum::<f64>()
            / n as f64
    };
    let reward: f64 = z.iter().zip(&problem.scores).map(|(z, s)| z * s).sum();
    hinge - problem.lambda * reward / problem.budget as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ReductionProblem {
        ReductionProblem {
            vote: VoteModel::zeros(2),
            rule_ids: vec![0],
            rule_labels: vec![1],
            rule_weights: vec![1.0],
            scores: vec![0.2],
            targets: vec![1],
            covering: vec![vec![0]],
            budget: 1,
            xi: 0.0,
            lambda: 0.0,
            forced: vec![],
        }
    }

    #[test]
    fn vote_examples() {
        let p = tiny();
        assert_eq!(vote_scores(&[0.0], &p, 0), vec![0.0, 0.0]);
        assert_eq!(vote_scores(&[0.5], &p, 0), vec![0.0, 0.5]);
    }

    #[test]
    fn hinge_examples() {
        assert_eq!(hinge_loss(&[0.7, 0.2, 0.1], 0, 0.3), 0.0);
        assert!((hinge_loss(&[0.4, 0.5, 0.1], 0, 0.3) - 0.4).abs() < 1e-15);
        assert_eq!(hinge_loss(&[0.5, 0.5], 0, 0.0), 0.0);
    }

    #[test]
    fn objective_at_zero_is_full_hinge() {
        let p = tiny().with_params(1.0, 0.0);
        assert_eq!(objective(&[0.0], &p), 1.0);
        let q = tiny().with_params(0.5, 2.0);
        // hinge max(0.5 - 1, 0) = 0, reward 2 * 0.2 / 1
        assert!((objective(&[1.0], &q) + 0.4).abs() < 1e-15);
    }
}
