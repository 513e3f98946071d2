use serde::{Deserialize, Serialize};

use super::lp::{solve_lp_relaxation, LpConfig};
use super::problem::{objective, ReductionProblem};
use super::rounding::round_selection;
use crate::error::Result;

/// Result of solving and rounding one `(xi, lambda)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSolution {
    pub xi: f64,
    pub lambda: f64,
    /// Fractional LP solution, by problem position.
    pub z: Vec<f64>,
    pub lp_objective: f64,
    /// Chosen positions, ascending.
    pub selected: Vec<usize>,
    /// Objective of the rounded indicator.
    pub objective: f64,
    /// Agreement with the original model on the problem's samples.
    pub fidelity: f64,
}

pub fn solve_cell(problem: &ReductionProblem, xi: f64, lambda: f64, lp: &LpConfig) -> Result<CellSolution> {
    let p = problem.with_params(xi, lambda);
    let relaxed = solve_lp_relaxation(&p, lp)?;
    let selected = round_selection(&relaxed.z, &p);
    let indicator = p.indicator(&selected);
    Ok(CellSolution {
        xi,
        lambda,
        objective: objective(&indicator, &p),
        fidelity: p.agreement(&indicator),
        z: relaxed.z,
        lp_objective: relaxed.objective,
        selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub xi_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    /// Largest fidelity loss accepted in exchange for anomaly reward.
    pub band: f64,
}

fn tenths() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 10.0).collect()
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { xi_values: tenths(), lambda_values: tenths(), band: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridOutcome {
    pub best: CellSolution,
    pub stage1_fidelity: f64,
    /// Every evaluated cell in evaluation order as `(xi, lambda, fidelity)`.
    pub trace: Vec<(f64, f64, f64)>,
}

/// Two-stage search over any cell evaluator: pick `xi` at `lambda = 0` by
/// fidelity (ties to the earlier `xi`), then the last `lambda` whose
/// fidelity stays within `band` of stage one. Falls back to the stage-one
/// cell when no `lambda` qualifies. Returns the chosen cell, the stage-one
/// fidelity and the trace.
pub fn two_stage_search<T>(
    config: &GridConfig,
    mut eval: impl FnMut(f64, f64) -> Result<T>,
    fidelity: impl Fn(&T) -> f64,
) -> Result<Option<(T, f64, Vec<(f64, f64, f64)>)>> {
    let mut trace = Vec::new();
    let mut stage1: Option<(f64, T)> = None;
    for &xi in &config.xi_values {
        let cell = eval(xi, 0.0)?;
        let f = fidelity(&cell);
        log::debug!("grid xi={xi} lambda=0 fidelity={f}");
        trace.push((xi, 0.0, f));
        if stage1.as_ref().map_or(true, |(_, b)| f > fidelity(b)) {
            stage1 = Some((xi, cell));
        }
    }
    let Some((xi, base)) = stage1 else { return Ok(None) };
    let base_fidelity = fidelity(&base);
    let floor = base_fidelity - config.band - 1e-12;
    let mut best = None;
    for &lambda in &config.lambda_values {
        let cell = eval(xi, lambda)?;
        let f = fidelity(&cell);
        log::debug!("grid xi={xi} lambda={lambda} fidelity={f}");
        trace.push((xi, lambda, f));
        if f >= floor {
            best = Some(cell);
        }
    }
    Ok(Some((best.unwrap_or(base), base_fidelity, trace)))
}

pub fn grid_search(problem: &ReductionProblem, config: &GridConfig, lp: &LpConfig) -> Result<GridOutcome> {
    match two_stage_search(config, |xi, lambda| solve_cell(problem, xi, lambda, lp), |c| c.fidelity)? {
        Some((best, stage1_fidelity, trace)) => Ok(GridOutcome { best, stage1_fidelity, trace }),
        None => {
            let best = solve_cell(problem, 0.0, 0.0, lp)?;
            let stage1_fidelity = best.fidelity;
            Ok(GridOutcome { best, stage1_fidelity, trace: Vec::new() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(profile: impl Fn(f64, f64) -> f64) -> (f64, f64) {
        let (cell, _, trace) =
            two_stage_search(&GridConfig::default(), |xi, l| Ok((xi, l, profile(xi, l))), |c| c.2).unwrap().unwrap();
        assert_eq!(trace.len(), 20);
        (cell.0, cell.1)
    }

    #[test]
    fn ties_in_stage_one_take_the_smallest_xi() {
        assert_eq!(run(|_, _| 1.0), (0.1, 1.0));
    }

    #[test]
    fn largest_lambda_within_band() {
        let profile = |xi: f64, l: f64| if xi > 0.45 && xi < 0.55 { if l >= 0.3 - 1e-9 { 0.88 } else { 0.90 } } else { 0.8 };
        assert_eq!(run(profile), (0.5, 0.2));
    }

    #[test]
    fn band_is_inclusive() {
        let (xi, l) = run(|_, l| if l > 0.0 { 0.99 } else { 1.0 });
        assert_eq!((xi, l), (0.1, 1.0));
    }

    #[test]
    fn no_qualifying_lambda_keeps_stage_one() {
        assert_eq!(run(|_, l| if l > 0.0 { 0.5 } else { 0.9 }), (0.1, 0.0));
    }
}
