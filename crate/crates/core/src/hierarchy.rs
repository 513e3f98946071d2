//! Levels of representative rules built on demand from user selections.
//!
//! Each level shows at most `M` representatives; every other rule in the
//! level's scope is hidden behind its nearest representative. Zooming into a
//! subset of representatives reduces their neighborhood to the next level,
//! keeping the selected rules.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::analysis::{Analysis, ReduceOptions, SelectionMetrics};
use crate::error::{Error, Result};
use crate::features::{attribute_usage_weights, weighted_distance, AttributeWeights};
use crate::ingest::Split;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyLevel {
    pub depth: usize,
    /// Representative rule ids, ascending.
    pub representatives: Vec<usize>,
    /// Representative id to the representative of the previous level it
    /// descends from. Absent at the root.
    pub parents: BTreeMap<usize, usize>,
    /// Hidden rule id to the representative it is assigned to.
    pub assignment: BTreeMap<usize, usize>,
    /// Training samples in scope, ascending.
    pub train_samples: Vec<usize>,
    pub test_samples: Vec<usize>,
    /// Usage frequency of each attribute among all rules of the level.
    pub attribute_weights: Vec<f64>,
    pub xi: Option<f64>,
    pub lambda: Option<f64>,
    pub metrics: SelectionMetrics,
}

impl HierarchyLevel {
    /// Every rule of the level, representatives and hidden, ascending.
    pub fn scope_rules(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.representatives.iter().chain(self.assignment.keys()).copied().collect();
        all.sort_unstable();
        all
    }

    pub fn is_representative(&self, rule: usize) -> bool {
        self.representatives.binary_search(&rule).is_ok()
    }

    /// Hidden rules behind `rep`, ascending.
    pub fn hidden_of(&self, rep: usize) -> Vec<usize> {
        self.assignment.iter().filter(|(_, &r)| r == rep).map(|(&h, _)| h).collect()
    }

    /// Representative plus its hidden rules.
    pub fn neighborhood_size(&self, rep: usize) -> usize {
        1 + self.assignment.values().filter(|&&r| r == rep).count()
    }
}

/// Nearest representative of every hidden rule under weighted Euclidean
/// distance; ties go to the lower representative id.
pub fn assign_hidden(
    analysis: &Analysis,
    representatives: &[usize],
    hidden: &[usize],
    weights: &AttributeWeights,
) -> Result<BTreeMap<usize, usize>> {
    let mut reps = representatives.to_vec();
    reps.sort_unstable();
    if reps.is_empty() {
        if hidden.is_empty() {
            return Ok(BTreeMap::new());
        }
        return Err(Error::InvalidArgument("cannot assign hidden rules without representatives".into()));
    }
    let mut out = BTreeMap::new();
    for &h in hidden {
        let mut best = (f64::INFINITY, reps[0]);
        for &r in &reps {
            let d = weighted_distance(&analysis.features[h], &analysis.features[r], weights)?;
            if d < best.0 {
                best = (d, r);
            }
        }
        out.insert(h, best.1);
    }
    Ok(out)
}

fn build_level(
    analysis: &Analysis,
    depth: usize,
    scope: &[usize],
    train: Vec<usize>,
    test: Vec<usize>,
    forced: &[usize],
    options: &ReduceOptions,
) -> Result<(HierarchyLevel, Vec<usize>)> {
    let selection = analysis.reduce(scope, &train, &test, forced, options)?;
    let reps = selection.rule_ids.clone();
    let rep_set: BTreeSet<usize> = reps.iter().copied().collect();
    let hidden: Vec<usize> = scope.iter().copied().filter(|j| !rep_set.contains(j)).collect();
    let weights = attribute_usage_weights(scope.iter().map(|&j| &analysis.rules[j]), &analysis.schema);
    let assignment = assign_hidden(analysis, &reps, &hidden, &weights)?;
    let level = HierarchyLevel {
        depth,
        representatives: reps.clone(),
        parents: BTreeMap::new(),
        assignment,
        train_samples: train,
        test_samples: test,
        attribute_weights: weights.per_attribute,
        xi: selection.xi,
        lambda: selection.lambda,
        metrics: selection.metrics,
    };
    Ok((level, reps))
}

/// Top level: a reduction of every rule against every training sample.
pub fn build_root(analysis: &Analysis, options: &ReduceOptions) -> Result<HierarchyLevel> {
    let all = analysis.all_rule_ids();
    let train = analysis.samples.train_indices();
    let test = analysis.samples.test_indices();
    Ok(build_level(analysis, 0, &all, train, test, &[], options)?.0)
}

/// Next level below `level` for the selected representatives.
pub fn zoom_in(
    analysis: &Analysis,
    level: &HierarchyLevel,
    selected: &[usize],
    options: &ReduceOptions,
) -> Result<HierarchyLevel> {
    if selected.is_empty() {
        return Err(Error::InvalidArgument("zoom needs at least one selected rule".into()));
    }
    let selected: BTreeSet<usize> = selected.iter().copied().collect();
    if let Some(&j) = selected.iter().find(|&&j| !level.is_representative(j)) {
        return Err(Error::InvalidArgument(format!("rule {j} is not a representative of this level")));
    }
    let mut neighborhood: Vec<usize> = selected.iter().copied().collect();
    neighborhood.extend(level.assignment.iter().filter(|(_, r)| selected.contains(r)).map(|(&h, _)| h));
    neighborhood.sort_unstable();

    let train = analysis.covered_samples(&neighborhood, Split::Train);
    if train.is_empty() {
        return Err(Error::InvalidArgument("the selected neighborhood covers no training samples".into()));
    }
    let test = analysis.covered_samples(&neighborhood, Split::Test);
    let forced: Vec<usize> = selected.iter().copied().collect();
    let (mut next, reps) = build_level(analysis, level.depth + 1, &neighborhood, train, test, &forced, options)?;
    next.parents = reps
        .iter()
        .map(|&r| (r, if selected.contains(&r) { r } else { level.assignment[&r] }))
        .collect();
    Ok(next)
}

/// A stack of levels with the selections that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Navigator {
    pub options: ReduceOptions,
    levels: Vec<HierarchyLevel>,
    /// `log[k]` produced `levels[k + 1]`.
    log: Vec<Vec<usize>>,
}

impl Navigator {
    pub fn new(analysis: &Analysis, options: ReduceOptions) -> Result<Self> {
        let root = build_root(analysis, &options)?;
        Ok(Navigator { options, levels: vec![root], log: Vec::new() })
    }

    pub fn current(&self) -> &HierarchyLevel {
        self.levels.last().expect("navigator always holds the root")
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[HierarchyLevel] {
        &self.levels
    }

    pub fn selection_log(&self) -> &[Vec<usize>] {
        &self.log
    }

    pub fn zoom_in(&mut self, analysis: &Analysis, selected: &[usize]) -> Result<&HierarchyLevel> {
        let next = zoom_in(analysis, self.current(), selected, &self.options)?;
        let mut sel = selected.to_vec();
        sel.sort_unstable();
        sel.dedup();
        self.log.push(sel);
        self.levels.push(next);
        Ok(self.current())
    }

    /// Drop the current level and return to its parent.
    pub fn zoom_out(&mut self) -> Result<&HierarchyLevel> {
        if self.levels.len() == 1 {
            return Err(Error::Navigation("already at the top level".into()));
        }
        self.levels.pop();
        self.log.pop();
        Ok(self.current())
    }

    /// Rebuild a navigator from a selection log.
    pub fn replay(analysis: &Analysis, options: ReduceOptions, log: &[Vec<usize>]) -> Result<Self> {
        let mut nav = Navigator::new(analysis, options)?;
        for sel in log {
            nav.zoom_in(analysis, sel)?;
        }
        Ok(nav)
    }
}
