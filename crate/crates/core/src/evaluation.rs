//! Comparison of the reducer against a random-M baseline.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{Analysis, ReduceOptions, SelectionMetrics};
use crate::error::{Error, Result};

/// `budget` distinct rule ids drawn uniformly from `0..n_rules`, ascending.
pub fn random_selection(n_rules: usize, budget: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = sample(&mut rng, n_rules, budget.min(n_rules)).into_vec();
    ids.sort_unstable();
    ids
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub trials: Vec<SelectionMetrics>,
    pub mean_fidelity_train: Option<f64>,
    pub mean_fidelity_test: Option<f64>,
    pub mean_average_anomaly_score: Option<f64>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

impl MethodReport {
    fn new(method: &str, trials: Vec<SelectionMetrics>) -> Self {
        MethodReport {
            method: method.to_string(),
            mean_fidelity_train: mean(trials.iter().map(|t| t.fidelity_train)),
            mean_fidelity_test: mean(trials.iter().map(|t| t.fidelity_test)),
            mean_average_anomaly_score: mean(trials.iter().map(|t| t.average_anomaly_score)),
            trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub budget: usize,
    pub n_rules: usize,
    pub seed: u64,
    pub methods: Vec<MethodReport>,
}

/// Run the reducer once (it is deterministic) and the random baseline
/// `trials` times with seeds `seed, seed + 1, ...`.
pub fn evaluate(
    analysis: &Analysis,
    options: &ReduceOptions,
    trials: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let train = analysis.samples.train_indices();
    let test = analysis.samples.test_indices();
    let ours = analysis.reduce_all(options)?;
    let random: Vec<SelectionMetrics> = (0..trials as u64)
        .map(|t| {
            let ids = random_selection(analysis.n_rules(), options.budget, seed.wrapping_add(t));
            analysis.metrics(&ids, &train, &test)
        })
        .collect();
    Ok(EvaluationReport {
        budget: options.budget,
        n_rules: analysis.n_rules(),
        seed,
        methods: vec![
            MethodReport::new("anomaly_biased", vec![ours.metrics; trials]),
            MethodReport::new("random", random),
        ],
    })
}
