//! Linear relaxation of the subset-selection problem.
//!
//! Variables are `z_j in [0, 1]` and one slack `L_i >= 0` per sample with
//!
//! ```text
//! L_i >= xi - (y_i[l_i](z) - y_i[c](z))   for every c != l_i
//! sum_j z_j <= M
//! minimize (1/n) sum_i L_i - (lambda / M) sum_j z_j s_j
//! ```
//!
//! which is exact for the hinge maxima because every `L_i` carries a
//! positive cost.

use std::time::Duration;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use serde::{Deserialize, Serialize};

use super::problem::{objective, ReductionProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpConfig {
    pub time_limit: Duration,
    /// Largest accepted gap between the solver's objective and an
    /// independent re-evaluation of the returned point.
    pub certify_tol: f64,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig { time_limit: Duration::from_secs(600), certify_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub z: Vec<f64>,
    pub objective: f64,
}

fn trivial_point(problem: &ReductionProblem) -> Vec<f64> {
    problem.indicator(&problem.forced)
}

pub fn solve_lp_relaxation(problem: &ReductionProblem, config: &LpConfig) -> Result<LpSolution> {
    problem.validate()?;
    let m = problem.n_rules();
    let n = problem.n_samples();
    let c_count = problem.vote.n_classes;
    let forced = problem.is_forced();

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let reward = problem.lambda / problem.budget as f64;
    let z: Vec<Variable> = (0..m)
        .map(|j| {
            let bounds = if forced[j] { (1.0, 1.0) } else { (0.0, 1.0) };
            lp.add_var(-reward * problem.scores[j], bounds)
        })
        .collect();
    let slack: Vec<Variable> = (0..n).map(|_| lp.add_var(1.0 / n as f64, (0.0, f64::INFINITY))).collect();

    let base = &problem.vote.base_scores;
    let mut terms: Vec<(Variable, f64)> = Vec::new();
    for i in 0..n {
        let target = problem.targets[i];
        for c in (0..c_count).filter(|&c| c != target) {
            terms.clear();
            terms.push((slack[i], 1.0));
            for &j in &problem.covering[i] {
                let label = problem.rule_labels[j];
                let w = problem.rule_weights[j];
                if label == target {
                    terms.push((z[j], w));
                } else if label == c {
                    terms.push((z[j], -w));
                }
            }
            lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, problem.xi - (base[target] - base[c]));
        }
    }
    let free: Vec<(Variable, f64)> = (0..m).filter(|&j| !forced[j]).map(|j| (z[j], 1.0)).collect();
    if !free.is_empty() {
        lp.add_constraint(free.as_slice(), ComparisonOp::Le, problem.free_budget() as f64);
    }

    let incumbent = || Some(trivial_point(problem));
    lp.set_time_limit(config.time_limit);
    let outcome = lp.solve().map_err(|e| Error::Solver {
        message: e.to_string(),
        incumbent: incumbent(),
    })?;
    let solution = outcome.into_solution().map_err(|interrupted| Error::Solver {
        message: format!("stopped before optimality: {:?}", interrupted.termination_reason()),
        incumbent: incumbent(),
    })?;

    let values: Vec<f64> = z.iter().map(|&v| solution.var_value(v).clamp(0.0, 1.0)).collect();
    let used: f64 = (0..m).filter(|&j| !forced[j]).map(|j| values[j]).sum();
    if used > problem.free_budget() as f64 + config.certify_tol {
        return Err(Error::Solver {
            message: format!("budget violated: {used} > {}", problem.free_budget()),
            incumbent: incumbent(),
        });
    }
    let reported = solution.objective();
    let checked = objective(&values, problem);
    if (reported - checked).abs() > config.certify_tol * reported.abs().max(1.0) {
        return Err(Error::Solver {
            message: format!("objective certification failed: solver {reported}, re-evaluated {checked}"),
            incumbent: incumbent(),
        });
    }
    Ok(LpSolution { z: values, objective: checked })
}
