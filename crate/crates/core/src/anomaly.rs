//! Multinomial logistic regression over rule vectors and the anomaly score
//! `1 - p(own label)` it induces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::RuleFeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm falls to this value.
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig { l2: 1e-4, max_iters: 500, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub n_classes: usize,
    pub dim: usize,
    /// Row-major `n_classes x dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub config: LogisticConfig,
    /// Set when every training label was the same class; the model then
    /// assigns that class probability 1.
    pub degenerate: Option<usize>,
    pub iterations: usize,
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

impl LogisticModel {
    pub fn zeros(n_classes: usize, dim: usize, config: LogisticConfig) -> Self {
        LogisticModel {
            n_classes,
            dim,
            weights: vec![0.0; n_classes * dim],
            bias: vec![0.0; n_classes],
            config,
            degenerate: None,
            iterations: 0,
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        if let Some(c) = self.degenerate {
            let mut p = vec![0.0; self.n_classes];
            p[c] = 1.0;
            return p;
        }
        let mut z: Vec<f64> = (0..self.n_classes)
            .map(|c| {
                let row = &self.weights[c * self.dim..(c + 1) * self.dim];
                self.bias[c] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect();
        softmax_in_place(&mut z);
        z
    }

    fn params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.extend_from_slice(&self.bias);
        p
    }

    fn set_params(&mut self, p: &[f64]) {
        let w = self.n_classes * self.dim;
        self.weights.copy_from_slice(&p[..w]);
        self.bias.copy_from_slice(&p[w..]);
    }
}

/// Regularized mean cross-entropy and its gradient with respect to the
/// flattened parameters `[weights (row-major), bias]`. Bias terms are not
/// penalized.
pub fn loss_and_gradient(
    params: &[f64],
    features: &[&[f64]],
    labels: &[usize],
    n_classes: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let dim = features.first().map_or(0, |f| f.len());
    let nw = n_classes * dim;
    let (w, b) = params.split_at(nw);
    let n = features.len() as f64;
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let mut z = vec![0.0; n_classes];
    for (x, &y) in features.iter().zip(labels) {
        for c in 0..n_classes {
            let row = &w[c * dim..(c + 1) * dim];
            z[c] = b[c] + row.iter().zip(x.iter()).map(|(a, v)| a * v).sum::<f64>();
        }
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - z[y];
        for c in 0..n_classes {
            let p = (z[c] - lse).exp();
            let r = (p - if c == y { 1.0 } else { 0.0 }) / n;
            let g = &mut grad[c * dim..(c + 1) * dim];
            for (gi, xi) in g.iter_mut().zip(x.iter()) {
                *gi += r * xi;
            }
            grad[nw + c] += r;
        }
    }
    loss /= n;
    let mut reg = 0.0;
    for (g, wi) in grad[..nw].iter_mut().zip(w) {
        *g += l2 * wi;
        reg += wi * wi;
    }
    (loss + 0.5 * l2 * reg, grad)
}

/// Full-batch gradient descent with Armijo backtracking. Each rule is one
/// observation; rule vote weights play no role here.
pub fn fit_logistic(
    features: &[RuleFeatureVector],
    labels: &[usize],
    n_classes: usize,
    config: LogisticConfig,
) -> Result<LogisticModel> {
    if features.is_empty() {
        return Err(Error::InvalidArgument("logistic fit needs at least one rule".into()));
    }
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: features.len(), found: labels.len() });
    }
    let dim = features[0].dim();
    if dim == 0 {
        return Err(Error::InvalidArgument("rule vectors are empty".into()));
    }
    if let Some(f) = features.iter().find(|f| f.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: f.dim() });
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::InvalidArgument(format!("label {l} out of range")));
    }

    let mut model = LogisticModel::zeros(n_classes, dim, config);
    if labels.iter().all(|&l| l == labels[0]) {
        log::warn!("all rules share label {}; anomaly scores are all zero", labels[0]);
        model.degenerate = Some(labels[0]);
        return Ok(model);
    }
    let xs: Vec<&[f64]> = features.iter().map(|f| f.as_slice()).collect();
    let mut params = model.params();
    let (mut loss, mut grad) = loss_and_gradient(&params, &xs, labels, n_classes, config.l2);
    let mut step = 1.0;
    let mut iters = 0;
    while iters < config.max_iters {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() <= config.tol {
            break;
        }
        iters += 1;
        step *= 2.0;
        let mut accepted = false;
        while step > 1e-12 {
            let trial: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (trial_loss, trial_grad) = loss_and_gradient(&trial, &xs, labels, n_classes, config.l2);
            if trial_loss <= loss - 0.5 * step * gnorm2 {
                params = trial;
                loss = trial_loss;
                grad = trial_grad;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    model.set_params(&params);
    model.iterations = iters;
    Ok(model)
}

/// Anomaly score per rule, in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyScores(pub Vec<f64>);

impl AnomalyScores {
    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

pub fn anomaly_scores(
    model: &LogisticModel,
    features: &[RuleFeatureVector],
    labels: &[usize],
) -> AnomalyScores {
    AnomalyScores(
        features
            .iter()
            .zip(labels)
            .map(|(f, &l)| (1.0 - model.predict_proba(f.as_slice())[l]).clamp(0.0, 1.0))
            .collect(),
    )
}
