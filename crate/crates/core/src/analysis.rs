//! Everything derived once per loaded model: rules, coverage, quantile maps,
//! rule vectors and anomaly scores, plus reduction over any rule subset.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::anomaly::{anomaly_scores, fit_logistic, AnomalyScores, LogisticConfig, LogisticModel};
use crate::error::{Error, Result};
use crate::features::{build_quantile_maps, vectorize_rule, QuantileMaps, RuleFeatureVector};
use crate::ingest::{
    extract_rules, load_samples, load_schema, parse_ensemble, DatasetSchema, ModelFormat, ModelKind, Rule,
    SampleTable, TreeEnsemble,
};
use crate::reduction::{
    average_anomaly_score, build_coverage, fidelity, grid_search, rule_stats, solve_cell, CoverageIndex,
    GridConfig, LpConfig, ReductionProblem, RuleStats, VoteModel,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Tuning {
    /// Two-stage search over `xi` then `lambda`.
    Grid(GridConfig),
    Fixed { xi: f64, lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceOptions {
    pub budget: usize,
    pub tuning: Tuning,
    pub lp: LpConfig,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { budget: 80, tuning: Tuning::Grid(GridConfig::default()), lp: LpConfig::default() }
    }
}

impl ReduceOptions {
    pub fn fixed(budget: usize, xi: f64, lambda: f64) -> Self {
        ReduceOptions { budget, tuning: Tuning::Fixed { xi, lambda }, lp: LpConfig::default() }
    }

    pub fn grid(budget: usize) -> Self {
        ReduceOptions { budget, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    /// `None` when the split has no in-scope samples.
    pub fidelity_train: Option<f64>,
    pub fidelity_test: Option<f64>,
    /// `None` for an empty selection.
    pub average_anomaly_score: Option<f64>,
}

/// Outcome of one reduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    /// Chosen rule ids, ascending.
    pub rule_ids: Vec<usize>,
    /// Rule ids the selection was drawn from.
    pub candidate_ids: Vec<usize>,
    /// Fractional solution aligned with `candidate_ids`.
    pub z: Vec<f64>,
    /// Objective of the rounded selection; `None` when every candidate fit
    /// in the budget and no optimization ran.
    pub objective: Option<f64>,
    pub xi: Option<f64>,
    pub lambda: Option<f64>,
    pub metrics: SelectionMetrics,
    /// `(xi, lambda, training fidelity)` of every grid cell evaluated.
    pub grid_trace: Vec<(f64, f64, f64)>,
}

/// A loaded model with all per-rule derived data.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub schema: DatasetSchema,
    pub samples: SampleTable,
    pub ensemble: TreeEnsemble,
    pub rules: Vec<Rule>,
    /// Original-model prediction of every sample.
    pub targets: Vec<usize>,
    pub coverage: CoverageIndex,
    pub maps: QuantileMaps,
    pub features: Vec<RuleFeatureVector>,
    pub logistic: LogisticModel,
    pub scores: AnomalyScores,
    pub vote: VoteModel,
    pub rule_stats: Vec<RuleStats>,
}

impl Analysis {
    pub fn new(schema: DatasetSchema, samples: SampleTable, ensemble: TreeEnsemble) -> Result<Self> {
        Self::with_logistic_config(schema, samples, ensemble, LogisticConfig::default())
    }

    pub fn with_logistic_config(
        schema: DatasetSchema,
        samples: SampleTable,
        ensemble: TreeEnsemble,
        config: LogisticConfig,
    ) -> Result<Self> {
        if ensemble.n_classes != schema.n_classes() {
            return Err(Error::mismatch(
                Default::default(),
                format!("model has {} classes, schema {}", ensemble.n_classes, schema.n_classes()),
            ));
        }
        if let Some(s) = samples.samples.iter().find(|s| s.values.len() != schema.n_attributes()) {
            return Err(Error::DimensionMismatch { expected: schema.n_attributes(), found: s.values.len() });
        }
        let rules = extract_rules(&ensemble, &schema)?;
        let targets = samples.samples.iter().map(|s| ensemble.predict(s)).collect();
        let coverage = build_coverage(&rules, &samples);
        let maps = build_quantile_maps(&samples, &schema)?;
        for w in &maps.warnings {
            log::warn!("attribute {w} is constant on the training rows");
        }
        let features: Vec<RuleFeatureVector> = rules.iter().map(|r| vectorize_rule(r, &schema, &maps)).collect();
        let labels: Vec<usize> = rules.iter().map(|r| r.label).collect();
        let logistic = fit_logistic(&features, &labels, schema.n_classes(), config)?;
        let scores = anomaly_scores(&logistic, &features, &labels);
        let vote = match ensemble.model_kind {
            ModelKind::RandomForest => VoteModel::zeros(schema.n_classes()),
            ModelKind::GradientBoosted => {
                VoteModel { n_classes: schema.n_classes(), base_scores: ensemble.base_scores.clone() }
            }
        };
        let rule_stats = (0..rules.len()).map(|j| rule_stats(j, &coverage, &samples)).collect();
        Ok(Analysis {
            schema,
            samples,
            ensemble,
            rules,
            targets,
            coverage,
            maps,
            features,
            logistic,
            scores,
            vote,
            rule_stats,
        })
    }

    pub fn load(
        model: impl AsRef<Path>,
        format: ModelFormat,
        data: impl AsRef<Path>,
        schema: impl AsRef<Path>,
    ) -> Result<Self> {
        let schema = load_schema(schema)?;
        let samples = load_samples(data, &schema)?;
        let ensemble = parse_ensemble(model, format, &schema)?;
        Self::new(schema, samples, ensemble)
    }

    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn all_rule_ids(&self) -> Vec<usize> {
        (0..self.rules.len()).collect()
    }

    /// Samples of `split` covered by at least one of `rule_ids`, ascending.
    pub fn covered_samples(&self, rule_ids: &[usize], split: crate::ingest::Split) -> Vec<usize> {
        let mut hit = vec![false; self.samples.len()];
        for &j in rule_ids {
            for &i in self.coverage.covered(j) {
                hit[i] = true;
            }
        }
        (0..self.samples.len()).filter(|&i| hit[i] && self.samples.get(i).split == split).collect()
    }

    /// Fidelity of `rule_ids` on `samples` and their mean anomaly score.
    pub fn metrics(&self, rule_ids: &[usize], train: &[usize], test: &[usize]) -> SelectionMetrics {
        SelectionMetrics {
            fidelity_train: fidelity(rule_ids, &self.coverage, &self.vote, &self.targets, train),
            fidelity_test: fidelity(rule_ids, &self.coverage, &self.vote, &self.targets, test),
            average_anomaly_score: average_anomaly_score(rule_ids, self.scores.as_slice()).ok(),
        }
    }

    pub fn problem(&self, candidates: &[usize], train: &[usize], budget: usize, forced: &[usize]) -> Result<ReductionProblem> {
        ReductionProblem::from_coverage(
            &self.coverage,
            &self.vote,
            candidates,
            train,
            &self.targets,
            self.scores.as_slice(),
            budget,
            forced,
        )
    }

    /// Select at most `budget` of `candidates` (or `forced.len()` when
    /// that is larger) to reproduce the original predictions on `train`.
    pub fn reduce(
        &self,
        candidates: &[usize],
        train: &[usize],
        test: &[usize],
        forced: &[usize],
        options: &ReduceOptions,
    ) -> Result<Selection> {
        if options.budget == 0 {
            return Err(Error::InvalidArgument("budget M must be at least 1".into()));
        }
        if let Some(&j) = candidates.iter().find(|&&j| j >= self.rules.len()) {
            return Err(Error::NotFound(format!("rule {j}")));
        }
        let mut candidate_ids = candidates.to_vec();
        candidate_ids.sort_unstable();
        candidate_ids.dedup();
        if candidate_ids.len() <= options.budget.max(forced.len()) {
            return Ok(Selection {
                metrics: self.metrics(&candidate_ids, train, test),
                z: vec![1.0; candidate_ids.len()],
                rule_ids: candidate_ids.clone(),
                candidate_ids,
                objective: None,
                xi: None,
                lambda: None,
                grid_trace: Vec::new(),
            });
        }
        let problem = self.problem(&candidate_ids, train, options.budget, forced)?;
        let (cell, grid_trace) = match &options.tuning {
            Tuning::Grid(config) => {
                let outcome = grid_search(&problem, config, &options.lp)?;
                (outcome.best, outcome.trace)
            }
            Tuning::Fixed { xi, lambda } => (solve_cell(&problem, *xi, *lambda, &options.lp)?, Vec::new()),
        };
        let rule_ids: Vec<usize> = cell.selected.iter().map(|&p| candidate_ids[p]).collect();
        Ok(Selection {
            metrics: self.metrics(&rule_ids, train, test),
            rule_ids,
            candidate_ids,
            z: cell.z,
            objective: Some(cell.objective),
            xi: Some(cell.xi),
            lambda: Some(cell.lambda),
            grid_trace,
        })
    }

    /// Reduction of the whole rule set against the training split.
    pub fn reduce_all(&self, options: &ReduceOptions) -> Result<Selection> {
        let train = self.samples.train_indices();
        let test = self.samples.test_indices();
        self.reduce(&self.all_rule_ids(), &train, &test, &[], options)
    }
}
