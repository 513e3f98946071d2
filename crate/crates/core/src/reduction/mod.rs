//! Anomaly-biased subset selection of rules.
//!
//! The reduced model keeps at most `M` rules and votes with them exactly as
//! the ensemble does. Selection minimizes a hinge loss against the original
//! predictions minus a reward for anomalous rules, solved as a linear
//! relaxation followed by deterministic top-`M` rounding.

mod coverage;
mod grid;
mod lp;
mod metrics;
mod problem;
mod rounding;

pub use coverage::{build_coverage, CoverEntry, CoverageIndex};
pub use grid::{grid_search, solve_cell, two_stage_search, CellSolution, GridConfig, GridOutcome};
pub use lp::{solve_lp_relaxation, LpConfig, LpSolution};
pub use metrics::{average_anomaly_score, fidelity, rule_confidence, rule_coverage, rule_stats, RuleStats};
pub use problem::{hinge_loss, objective, vote_scores, ReductionProblem, VoteModel};
pub use rounding::{round_selection, round_top, ZERO_TOL};
