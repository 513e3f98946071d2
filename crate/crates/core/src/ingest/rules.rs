use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::model::{argmax, LeafValue, ModelKind, Node, SplitTest, TreeEnsemble};
use super::samples::Sample;
use super::schema::{AttributeKind, DatasetSchema};
use crate::error::{Error, Location, Result};

/// A consolidated condition on one attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    /// Half-open interval `(lower, upper]`; either end may be infinite.
    Interval { lower: f64, upper: f64 },
    /// Sorted, non-empty set of admissible category indices.
    Categories(Vec<usize>),
}

impl Condition {
    pub fn satisfied_by(&self, value: f64) -> bool {
        match self {
            Condition::Interval { lower, upper } => *lower < value && value <= *upper,
            Condition::Categories(cats) => cats.binary_search(&(value as usize)).is_ok(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Condition::Interval { lower, upper } => lower >= upper,
            Condition::Categories(cats) => cats.is_empty(),
        }
    }

    /// Human-readable form, e.g. `Income <= 20` or `Citizen in {A, B}`.
    pub fn describe(&self, name: &str, categories: &[String]) -> String {
        match self {
            Condition::Interval { lower, upper } => match (lower.is_finite(), upper.is_finite()) {
                (false, true) => format!("{name} <= {upper}"),
                (true, false) => format!("{name} > {lower}"),
                (true, true) => format!("{lower} < {name} <= {upper}"),
                (false, false) => format!("{name} is any"),
            },
            Condition::Categories(cats) => {
                let names: Vec<&str> = cats.iter().map(|&c| categories[c].as_str()).collect();
                format!("{name} in {{{}}}", names.join(", "))
            }
        }
    }
}

// JSON has no infinities, so open interval ends serialize as `null`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ConditionRepr {
    Numeric { lower: Option<f64>, upper: Option<f64> },
    Categorical { categories: Vec<usize> },
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            Condition::Interval { lower, upper } => ConditionRepr::Numeric {
                lower: lower.is_finite().then_some(*lower),
                upper: upper.is_finite().then_some(*upper),
            },
            Condition::Categories(c) => ConditionRepr::Categorical { categories: c.clone() },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Condition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match ConditionRepr::deserialize(d)? {
            ConditionRepr::Numeric { lower, upper } => Condition::Interval {
                lower: lower.unwrap_or(f64::NEG_INFINITY),
                upper: upper.unwrap_or(f64::INFINITY),
            },
            ConditionRepr::Categorical { categories } => Condition::Categories(categories),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSource {
    pub tree: usize,
    /// Node index of the leaf inside its tree.
    pub leaf: usize,
}

/// A root-to-leaf path: conjunction of conditions implying `label` with
/// vote strength `weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: usize,
    pub conditions: BTreeMap<usize, Condition>,
    pub label: usize,
    pub weight: f64,
    pub source: RuleSource,
}

impl Rule {
    pub fn covers(&self, sample: &Sample) -> bool {
        self.conditions.iter().all(|(&a, c)| c.satisfied_by(sample.values[a]))
    }

    pub fn uses(&self, attr: usize) -> bool {
        self.conditions.contains_key(&attr)
    }

    pub fn describe(&self, schema: &DatasetSchema) -> String {
        let conds: Vec<String> = self
            .conditions
            .iter()
            .map(|(&a, c)| {
                let spec = &schema.attributes[a];
                c.describe(&spec.name, &spec.categories)
            })
            .collect();
        let body = if conds.is_empty() { "TRUE".to_string() } else { conds.join(" AND ") };
        format!("IF {body} THEN {}", schema.classes[self.label])
    }
}

fn narrow(
    conditions: &mut BTreeMap<usize, Condition>,
    attr: usize,
    test: &SplitTest,
    go_left: bool,
    n_categories: usize,
) {
    match test {
        SplitTest::Threshold(t) => {
            let entry = conditions
                .entry(attr)
                .or_insert(Condition::Interval { lower: f64::NEG_INFINITY, upper: f64::INFINITY });
            if let Condition::Interval { lower, upper } = entry {
                if go_left {
                    *upper = upper.min(*t);
                } else {
                    *lower = lower.max(*t);
                }
            }
        }
        SplitTest::Categories(left_cats) => {
            let entry = conditions
                .entry(attr)
                .or_insert_with(|| Condition::Categories((0..n_categories).collect()));
            if let Condition::Categories(cats) = entry {
                cats.retain(|c| left_cats.binary_search(c).is_ok() == go_left);
            }
        }
    }
}

/// One rule per leaf, ids assigned in tree order then node order.
pub fn extract_rules(ensemble: &TreeEnsemble, schema: &DatasetSchema) -> Result<Vec<Rule>> {
    let mut rules = Vec::with_capacity(ensemble.leaf_count());
    for (t, tree) in ensemble.trees.iter().enumerate() {
        let mut leaves: Vec<(usize, BTreeMap<usize, Condition>)> = Vec::new();
        let mut stack = vec![(0usize, BTreeMap::new())];
        while let Some((i, conds)) = stack.pop() {
            match &tree.nodes[i] {
                Node::Leaf(_) => leaves.push((i, conds)),
                Node::Split { attr, test, left, right } => {
                    let n_cat = schema.attributes[*attr].categories.len();
                    let mut lc = conds.clone();
                    narrow(&mut lc, *attr, test, true, n_cat);
                    let mut rc = conds;
                    narrow(&mut rc, *attr, test, false, n_cat);
                    stack.push((*right, rc));
                    stack.push((*left, lc));
                }
            }
        }
        leaves.sort_by_key(|(i, _)| *i);
        for (leaf, conditions) in leaves {
            if let Some((&a, _)) = conditions.iter().find(|(_, c)| c.is_empty()) {
                return Err(Error::InconsistentPath {
                    location: Location::node(t, leaf),
                    message: format!(
                        "conditions on `{}` are contradictory",
                        schema.attributes[a].name
                    ),
                });
            }
            // A category set that admits everything is no condition at all.
            let conditions = conditions
                .into_iter()
                .filter(|(a, c)| match c {
                    Condition::Categories(cats) => {
                        cats.len() < schema.attributes[*a].categories.len()
                    }
                    Condition::Interval { .. } => true,
                })
                .collect();
            let (label, weight) = match &tree.nodes[leaf] {
                Node::Leaf(LeafValue::Counts(counts)) => (argmax(counts), 1.0),
                Node::Leaf(LeafValue::Score(v)) => match (ensemble.model_kind, tree.target_class) {
                    (ModelKind::GradientBoosted, Some(c)) => (c, *v),
                    _ => (if *v > 0.0 { 1 } else { 0 }, v.abs()),
                },
                Node::Split { .. } => unreachable!(),
            };
            rules.push(Rule {
                id: rules.len(),
                conditions,
                label,
                weight,
                source: RuleSource { tree: t, leaf },
            });
        }
    }
    debug_assert!(rules.iter().all(|r| r.conditions.keys().all(|&a| {
        matches!(
            (&r.conditions[&a], schema.attributes[a].kind),
            (Condition::Interval { .. }, AttributeKind::Numeric)
                | (Condition::Categories(_), AttributeKind::Categorical)
        )
    })));
    Ok(rules)
}
