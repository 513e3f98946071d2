//! Fixed-length rule encodings and the weighted distance between them.
//!
//! Numeric conditions become a `[lower, upper]` pair in quantile space so
//! that every attribute lives on `[0, 1]`; categorical conditions become the
//! training distribution restricted to the admitted categories. Attributes a
//! rule does not test are encoded as the always-true condition.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{AttributeKind, Condition, DatasetSchema, Rule, SampleTable};

/// Empirical CDF of one numeric attribute over the training rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericQuantiles {
    /// Distinct training values, ascending.
    knots: Vec<f64>,
    /// CDF value at each knot.
    levels: Vec<f64>,
}

impl NumericQuantiles {
    /// Tied values sit at their mid-rank; the smallest and largest observed
    /// values are pinned to 0 and 1. Returns `None` when there are fewer than
    /// two distinct values.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut knots = Vec::new();
        let mut levels = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start;
            while end + 1 < n && sorted[end + 1] == sorted[start] {
                end += 1;
            }
            knots.push(sorted[start]);
            levels.push((start + end) as f64 / 2.0 / (n - 1).max(1) as f64);
            start = end + 1;
        }
        if knots.len() < 2 {
            return None;
        }
        levels[0] = 0.0;
        *levels.last_mut().unwrap() = 1.0;
        Some(NumericQuantiles { knots, levels })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.is_nan() {
            return 0.5;
        }
        let k = &self.knots;
        if x <= k[0] {
            return 0.0;
        }
        if x >= k[k.len() - 1] {
            return 1.0;
        }
        // first knot strictly greater than x
        let hi = k.partition_point(|&v| v <= x);
        let lo = hi - 1;
        let t = (x - k[lo]) / (k[hi] - k[lo]);
        self.levels[lo] + t * (self.levels[hi] - self.levels[lo])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AttributeQuantiles {
    Numeric(NumericQuantiles),
    /// Fewer than two distinct training values; everything maps to 0.5
    /// except the infinite interval ends.
    Constant,
    Categorical { counts: Vec<f64>, total: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileMaps {
    pub attributes: Vec<AttributeQuantiles>,
    /// Names of numeric attributes whose training values are all identical.
    pub warnings: Vec<String>,
}

impl QuantileMaps {
    /// Quantile of a raw value of a numeric attribute.
    pub fn eval(&self, attr: usize, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        match &self.attributes[attr] {
            AttributeQuantiles::Numeric(q) => q.eval(x),
            AttributeQuantiles::Constant => 0.5,
            AttributeQuantiles::Categorical { .. } => {
                panic!("quantile requested for categorical attribute {attr}")
            }
        }
    }

    /// Quantile-space `[lower, upper]` of a numeric condition.
    pub fn interval(&self, attr: usize, cond: &Condition) -> Option<(f64, f64)> {
        match cond {
            Condition::Interval { lower, upper } => {
                Some((self.eval(attr, *lower), self.eval(attr, *upper)))
            }
            Condition::Categories(_) => None,
        }
    }

    pub fn category_counts(&self, attr: usize) -> Option<(&[f64], f64)> {
        match &self.attributes[attr] {
            AttributeQuantiles::Categorical { counts, total } => Some((counts, *total)),
            _ => None,
        }
    }
}

pub fn build_quantile_maps(samples: &SampleTable, schema: &DatasetSchema) -> Result<QuantileMaps> {
    let train = samples.train_indices();
    if train.is_empty() {
        return Err(Error::InvalidArgument("quantile maps need at least one training row".into()));
    }
    let mut attributes = Vec::with_capacity(schema.n_attributes());
    let mut warnings = Vec::new();
    for (a, spec) in schema.attributes.iter().enumerate() {
        match spec.kind {
            AttributeKind::Numeric => {
                let values: Vec<f64> = train.iter().map(|&i| samples.get(i).values[a]).collect();
                match NumericQuantiles::from_values(&values) {
                    Some(q) => attributes.push(AttributeQuantiles::Numeric(q)),
                    None => {
                        warnings.push(spec.name.clone());
                        attributes.push(AttributeQuantiles::Constant);
                    }
                }
            }
            AttributeKind::Categorical => {
                let mut counts = vec![0.0; spec.categories.len()];
                for &i in &train {
                    counts[samples.get(i).category(a)] += 1.0;
                }
                attributes.push(AttributeQuantiles::Categorical { counts, total: train.len() as f64 });
            }
        }
    }
    Ok(QuantileMaps { attributes, warnings })
}

/// Training share of each admitted category; zero for the rest.
pub fn vectorize_condition_categorical(
    subset: &[usize],
    counts: &[f64],
    total: f64,
) -> Result<Vec<f64>> {
    if total <= 0.0 {
        return Err(Error::InvalidArgument("category total must be positive".into()));
    }
    if subset.is_empty() {
        return Err(Error::InvalidArgument("category subset must not be empty".into()));
    }
    let mut out = vec![0.0; counts.len()];
    for &k in subset {
        out[k] = counts[k] / total;
    }
    Ok(out)
}

/// Slot offsets of each attribute in a rule vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureLayout {
    offsets: Vec<usize>,
    dim: usize,
}

impl FeatureLayout {
    pub fn new(schema: &DatasetSchema) -> Self {
        let mut offsets = Vec::with_capacity(schema.n_attributes());
        let mut dim = 0;
        for spec in &schema.attributes {
            offsets.push(dim);
            dim += match spec.kind {
                AttributeKind::Numeric => 2,
                AttributeKind::Categorical => spec.categories.len(),
            };
        }
        FeatureLayout { offsets, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slots(&self, attr: usize) -> std::ops::Range<usize> {
        let end = self.offsets.get(attr + 1).copied().unwrap_or(self.dim);
        self.offsets[attr]..end
    }

    pub fn n_attributes(&self) -> usize {
        self.offsets.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleFeatureVector(pub Vec<f64>);

impl RuleFeatureVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn vectorize_rule(rule: &Rule, schema: &DatasetSchema, maps: &QuantileMaps) -> RuleFeatureVector {
    let layout = FeatureLayout::new(schema);
    let mut values = Vec::with_capacity(layout.dim());
    for (a, spec) in schema.attributes.iter().enumerate() {
        match (spec.kind, rule.conditions.get(&a)) {
            (AttributeKind::Numeric, None) => values.extend([0.0, 1.0]),
            (AttributeKind::Numeric, Some(cond)) => {
                let (lo, hi) = maps.interval(a, cond).expect("numeric condition");
                values.extend([lo, hi]);
            }
            (AttributeKind::Categorical, cond) => {
                let (counts, total) = maps.category_counts(a).expect("categorical attribute");
                let all: Vec<usize>;
                let subset = match cond {
                    Some(Condition::Categories(c)) => c.as_slice(),
                    _ => {
                        all = (0..counts.len()).collect();
                        &all
                    }
                };
                let v = vectorize_condition_categorical(subset, counts, total)
                    .expect("training rows exist and subsets are non-empty");
                values.extend(v);
            }
        }
    }
    RuleFeatureVector(values)
}

/// Per-attribute usage frequency broadcast to that attribute's slots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeWeights {
    pub per_attribute: Vec<f64>,
    pub per_slot: Vec<f64>,
}

impl AttributeWeights {
    pub fn from_attribute_weights(per_attribute: Vec<f64>, layout: &FeatureLayout) -> Self {
        let mut per_slot = vec![0.0; layout.dim()];
        for (a, &w) in per_attribute.iter().enumerate() {
            for s in layout.slots(a) {
                per_slot[s] = w;
            }
        }
        AttributeWeights { per_attribute, per_slot }
    }
}

pub fn attribute_usage_weights<'a>(
    rules: impl IntoIterator<Item = &'a Rule>,
    schema: &DatasetSchema,
) -> AttributeWeights {
    let mut used = vec![0usize; schema.n_attributes()];
    let mut n = 0usize;
    for rule in rules {
        n += 1;
        for &a in rule.conditions.keys() {
            used[a] += 1;
        }
    }
    let per_attribute = used.iter().map(|&u| if n == 0 { 0.0 } else { u as f64 / n as f64 }).collect();
    AttributeWeights::from_attribute_weights(per_attribute, &FeatureLayout::new(schema))
}

pub fn weighted_distance(
    a: &RuleFeatureVector,
    b: &RuleFeatureVector,
    w: &AttributeWeights,
) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if w.per_slot.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: w.per_slot.len() });
    }
    let sum: f64 = a
        .0
        .iter()
        .zip(&b.0)
        .zip(&w.per_slot)
        .map(|((x, y), w)| w * (x - y) * (x - y))
        .sum();
    Ok(sum.sqrt())
}
