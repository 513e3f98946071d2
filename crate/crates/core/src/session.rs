//! Interactive exploration state behind the HTTP service: one hierarchy
//! navigator, the matrix arrangement of each level, and the read-only views
//! (rule detail, filtered class distributions, sample table, statistics).
//!
//! Numbers leaving this module are rounded to six significant digits.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{Analysis, ReduceOptions, SelectionMetrics};
use crate::error::{Error, Result};
use crate::hierarchy::{HierarchyLevel, Navigator};
use crate::ingest::{AttributeKind, Condition, Split};
use crate::reorder::{
    group_by_attribute, rank_increase_arrows, reorder_rules, sort_attributes, sort_rules_by_metric, Direction,
    MatrixState, Metric, SortMode, DEFAULT_PAGE_SIZE, DEFAULT_TAU,
};

pub const SAMPLE_PAGE_SIZE: usize = 50;
pub const HISTOGRAM_BINS: usize = 10;

/// Round to six significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn sig6_opt(x: Option<f64>) -> Option<f64> {
    x.map(sig6)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConditionView {
    Numeric {
        attribute: usize,
        name: String,
        lower: Option<f64>,
        upper: Option<f64>,
        lower_quantile: f64,
        upper_quantile: f64,
        text: String,
    },
    Categorical {
        attribute: usize,
        name: String,
        categories: Vec<String>,
        indices: Vec<usize>,
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleRow {
    pub id: usize,
    pub parent: Option<usize>,
    pub label: usize,
    pub label_name: String,
    pub conditions: Vec<ConditionView>,
    pub coverage: usize,
    pub confidence: f64,
    pub anomaly_score: f64,
    pub neighborhood_size: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeColumn {
    pub index: usize,
    pub name: String,
    pub kind: AttributeKind,
    /// Displayed rules testing the attribute.
    pub usage: usize,
    /// Of those, how many predict each class.
    pub label_counts: Vec<usize>,
    pub page: usize,
    pub pinned: bool,
}

/// Everything the matrix view renders for one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPayload {
    pub depth: usize,
    pub classes: Vec<String>,
    /// Rows in display order.
    pub rules: Vec<RuleRow>,
    /// Rule ids in display order.
    pub row_order: Vec<usize>,
    /// Columns in display order.
    pub attributes: Vec<AttributeColumn>,
    pub page_size: usize,
    pub n_pages: usize,
    pub page: usize,
    /// Names of up to three attributes that rose most in rank on the last
    /// zoom.
    pub arrows: Vec<String>,
    pub boundaries: Vec<Vec<(usize, usize)>>,
    pub mode: SortMode,
    /// Rules in the level's scope, representatives included.
    pub n_scope_rules: usize,
    pub n_scope_samples: usize,
    pub xi: Option<f64>,
    pub lambda: Option<f64>,
    pub metrics: SelectionMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Histogram {
    /// Ten equal-quantile bins; bin `b` holds quantiles in `[b/10, (b+1)/10)`
    /// with the maximum in the last bin.
    Numeric { attribute: usize, name: String, covered: Vec<usize>, all: Vec<usize> },
    Categorical { attribute: usize, name: String, categories: Vec<String>, covered: Vec<usize>, all: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleDetail {
    pub rule: RuleRow,
    /// Covered training sample ids, ascending.
    pub covered_samples: Vec<usize>,
    /// Per attribute, covered training samples against all training samples.
    pub histograms: Vec<Histogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Predicate {
    /// `lower <= value <= upper`; a missing end is unbounded.
    Range { attribute: String, lower: Option<f64>, upper: Option<f64> },
    Categories { attribute: String, categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDistribution {
    /// Labelled samples per class.
    pub counts: Vec<usize>,
    /// `counts` normalized to sum to 1, or all zeros when empty.
    pub fractions: Vec<f64>,
    pub total: usize,
}

impl ClassDistribution {
    fn of(labels: impl Iterator<Item = Option<usize>>, n_classes: usize) -> Self {
        let mut counts = vec![0; n_classes];
        for l in labels.flatten() {
            counts[l] += 1;
        }
        let total: usize = counts.iter().sum();
        let fractions =
            counts.iter().map(|&c| if total == 0 { 0.0 } else { sig6(c as f64 / total as f64) }).collect();
        ClassDistribution { counts, fractions, total }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterResult {
    pub before: ClassDistribution,
    pub after: ClassDistribution,
    pub matching: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub id: usize,
    pub values: Vec<String>,
    pub label: Option<String>,
    pub prediction: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplesPage {
    pub columns: Vec<String>,
    pub rows: Vec<SampleRow>,
    pub page: usize,
    pub page_size: usize,
    /// Covered samples across all pages.
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Info {
    pub depth: usize,
    pub n_rules: usize,
    /// Displayed rules per predicted class.
    pub rules_per_label: Vec<usize>,
    /// Covered scope samples per ground-truth class.
    pub samples_per_class: Vec<usize>,
    pub mean_confidence: Option<f64>,
    pub mean_anomaly_score: Option<f64>,
    pub metrics: SelectionMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OrderMode {
    Metric {
        metric: Metric,
        #[serde(default = "default_direction")]
        direction: Direction,
    },
    Group {
        attribute: String,
    },
    Reorder {
        attributes: Vec<String>,
        #[serde(default)]
        tau: Option<f64>,
    },
}

fn default_direction() -> Direction {
    Direction::Desc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRequest {
    #[serde(default)]
    pub sort: Option<OrderMode>,
    /// Attribute names to pin, replacing the current pins when present.
    #[serde(default)]
    pub pinned: Option<Vec<String>>,
    #[serde(default)]
    pub page: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
struct View {
    matrix: MatrixState,
    arrows: Vec<usize>,
}

/// One user's exploration of a loaded model.
#[derive(Debug, Clone)]
pub struct Session {
    analysis: Arc<Analysis>,
    navigator: Navigator,
    /// Matrix arrangement of each level on the navigator's stack.
    views: Vec<View>,
    filter: Vec<Predicate>,
}

impl Session {
    pub fn new(analysis: Arc<Analysis>, options: ReduceOptions) -> Result<Self> {
        let navigator = Navigator::new(&analysis, options)?;
        let mut session = Session { analysis, navigator, views: Vec::new(), filter: Vec::new() };
        let view = session.initial_view(&[], Vec::new());
        session.views.push(view);
        Ok(session)
    }

    pub fn analysis(&self) -> &Analysis {
        &self.analysis
    }

    pub fn level(&self) -> &HierarchyLevel {
        self.navigator.current()
    }

    pub fn navigator(&self) -> &Navigator {
        &self.navigator
    }

    pub fn matrix(&self) -> &MatrixState {
        &self.view().matrix
    }

    pub fn filter(&self) -> &[Predicate] {
        &self.filter
    }

    fn view(&self) -> &View {
        self.views.last().expect("one view per level")
    }

    fn displayed(&self) -> Vec<&crate::ingest::Rule> {
        self.view().matrix.row_order.iter().map(|&j| &self.analysis.rules[j]).collect()
    }

    fn metric_values(&self, rows: &[usize], metric: Metric) -> Vec<f64> {
        rows.iter()
            .map(|&j| match metric {
                Metric::Coverage => self.analysis.rule_stats[j].coverage as f64,
                Metric::Confidence => self.analysis.rule_stats[j].confidence,
                Metric::Anomaly => self.analysis.scores.get(j),
            })
            .collect()
    }

    /// Coverage-descending rows of the current level with fresh columns.
    fn initial_view(&self, pinned: &[usize], previous_columns: Vec<usize>) -> View {
        let reps = self.level().representatives.clone();
        let cov = self.metric_values(&reps, Metric::Coverage);
        let row_order: Vec<usize> =
            sort_rules_by_metric(&cov, Direction::Desc).into_iter().map(|p| reps[p]).collect();
        let rules: Vec<_> = reps.iter().map(|&j| &self.analysis.rules[j]).collect();
        let attributes = sort_attributes(&rules, self.analysis.schema.n_attributes(), pinned, DEFAULT_PAGE_SIZE);
        let arrows = if previous_columns.is_empty() {
            Vec::new()
        } else {
            rank_increase_arrows(&previous_columns, &attributes.order)
        };
        View {
            matrix: MatrixState {
                row_order,
                attributes,
                pinned: pinned.to_vec(),
                page: 0,
                boundaries: Vec::new(),
                mode: SortMode::default(),
                tau: DEFAULT_TAU,
            },
            arrows,
        }
    }

    fn attribute(&self, name: &str) -> Result<usize> {
        self.analysis
            .schema
            .attribute_index(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown attribute `{name}`")))
    }

    pub fn zoom(&mut self, selected: &[usize]) -> Result<LevelPayload> {
        let pinned = self.view().matrix.pinned.clone();
        let previous = self.view().matrix.attributes.order.clone();
        self.navigator.zoom_in(&self.analysis, selected)?;
        let view = self.initial_view(&pinned, previous);
        self.views.push(view);
        Ok(self.payload())
    }

    pub fn back(&mut self) -> Result<LevelPayload> {
        self.navigator.zoom_out()?;
        self.views.pop();
        Ok(self.payload())
    }

    pub fn order(&mut self, request: &OrderRequest) -> Result<LevelPayload> {
        let mut matrix = self.view().matrix.clone();
        if let Some(names) = &request.pinned {
            let pinned = names.iter().map(|n| self.attribute(n)).collect::<Result<Vec<_>>>()?;
            let rules = self.displayed();
            matrix.attributes =
                sort_attributes(&rules, self.analysis.schema.n_attributes(), &pinned, matrix.attributes.page_size);
            matrix.pinned = pinned;
        }
        let rules: Vec<_> = matrix.row_order.iter().map(|&j| &self.analysis.rules[j]).collect();
        match &request.sort {
            None => {}
            Some(OrderMode::Metric { metric, direction }) => {
                let values = self.metric_values(&matrix.row_order, *metric);
                matrix.row_order =
                    sort_rules_by_metric(&values, *direction).into_iter().map(|p| matrix.row_order[p]).collect();
                matrix.boundaries = Vec::new();
                matrix.mode = SortMode::Metric { metric: *metric, direction: *direction };
            }
            Some(OrderMode::Group { attribute }) => {
                let a = self.attribute(attribute)?;
                let g = group_by_attribute(&rules, a, matrix.tau, &self.analysis.maps);
                matrix.row_order = g.order;
                matrix.boundaries = vec![g.groups];
                matrix.mode = SortMode::Group { attribute: a };
            }
            Some(OrderMode::Reorder { attributes, tau }) => {
                if attributes.is_empty() {
                    return Err(Error::InvalidArgument("reorder needs at least one attribute".into()));
                }
                let attrs = attributes.iter().map(|n| self.attribute(n)).collect::<Result<Vec<_>>>()?;
                let tau = tau.unwrap_or(matrix.tau);
                if !(0.0..=1.0).contains(&tau) {
                    return Err(Error::InvalidArgument("tau must lie in [0, 1]".into()));
                }
                let r = reorder_rules(&rules, &attrs, tau, &self.analysis.maps);
                matrix.row_order = r.order;
                matrix.boundaries = r.boundaries;
                matrix.tau = tau;
                matrix.mode = SortMode::Reordered { attributes: attrs };
            }
        }
        if let Some(page) = request.page {
            let n_pages = matrix.attributes.pages().len();
            if page >= n_pages.max(1) {
                return Err(Error::InvalidArgument(format!("page {page} out of range")));
            }
            matrix.page = page;
        }
        self.views.last_mut().expect("one view per level").matrix = matrix;
        Ok(self.payload())
    }

    fn condition_views(&self, rule: &crate::ingest::Rule) -> Vec<ConditionView> {
        let schema = &self.analysis.schema;
        rule.conditions
            .iter()
            .map(|(&a, c)| {
                let spec = &schema.attributes[a];
                let text = c.describe(&spec.name, &spec.categories);
                match c {
                    Condition::Interval { lower, upper } => ConditionView::Numeric {
                        attribute: a,
                        name: spec.name.clone(),
                        lower: lower.is_finite().then(|| sig6(*lower)),
                        upper: upper.is_finite().then(|| sig6(*upper)),
                        lower_quantile: sig6(self.analysis.maps.eval(a, *lower)),
                        upper_quantile: sig6(self.analysis.maps.eval(a, *upper)),
                        text,
                    },
                    Condition::Categories(idx) => ConditionView::Categorical {
                        attribute: a,
                        name: spec.name.clone(),
                        categories: idx.iter().map(|&k| spec.categories[k].clone()).collect(),
                        indices: idx.clone(),
                        text,
                    },
                }
            })
            .collect()
    }

    fn rule_row(&self, j: usize) -> RuleRow {
        let a = &self.analysis;
        let rule = &a.rules[j];
        let level = self.level();
        RuleRow {
            id: j,
            parent: level.parents.get(&j).copied(),
            label: rule.label,
            label_name: a.schema.classes[rule.label].clone(),
            conditions: self.condition_views(rule),
            coverage: a.rule_stats[j].coverage,
            confidence: sig6(a.rule_stats[j].confidence),
            anomaly_score: sig6(a.scores.get(j)),
            neighborhood_size: level.neighborhood_size(j),
            text: rule.describe(&a.schema),
        }
    }

    pub fn payload(&self) -> LevelPayload {
        let a = &self.analysis;
        let level = self.level();
        let view = self.view();
        let m = &view.matrix;
        let rules = self.displayed();
        let page_of = m.attributes.page_of();
        let attributes = m
            .attributes
            .order
            .iter()
            .map(|&i| {
                let spec = &a.schema.attributes[i];
                let mut label_counts = vec![0; a.schema.n_classes()];
                for r in rules.iter().filter(|r| r.uses(i)) {
                    label_counts[r.label] += 1;
                }
                AttributeColumn {
                    index: i,
                    name: spec.name.clone(),
                    kind: spec.kind,
                    usage: label_counts.iter().sum(),
                    label_counts,
                    page: page_of[i],
                    pinned: m.pinned.contains(&i),
                }
            })
            .collect();
        LevelPayload {
            depth: level.depth,
            classes: a.schema.classes.clone(),
            rules: m.row_order.iter().map(|&j| self.rule_row(j)).collect(),
            row_order: m.row_order.clone(),
            attributes,
            page_size: m.attributes.page_size,
            n_pages: m.attributes.pages().len(),
            page: m.page,
            arrows: view.arrows.iter().map(|&i| a.schema.attributes[i].name.clone()).collect(),
            boundaries: m.boundaries.clone(),
            mode: m.mode.clone(),
            n_scope_rules: level.representatives.len() + level.assignment.len(),
            n_scope_samples: level.train_samples.len(),
            xi: sig6_opt(level.xi),
            lambda: sig6_opt(level.lambda),
            metrics: SelectionMetrics {
                fidelity_train: sig6_opt(level.metrics.fidelity_train),
                fidelity_test: sig6_opt(level.metrics.fidelity_test),
                average_anomaly_score: sig6_opt(level.metrics.average_anomaly_score),
            },
        }
    }

    pub fn rule_detail(&self, rule: usize) -> Result<RuleDetail> {
        if !self.level().is_representative(rule) {
            return Err(Error::NotFound(format!("rule {rule} is not displayed")));
        }
        let a = &self.analysis;
        let train = a.samples.train_indices();
        let covered: Vec<usize> =
            a.coverage.covered(rule).iter().copied().filter(|&i| a.samples.get(i).split == Split::Train).collect();
        let histograms = a
            .schema
            .attributes
            .iter()
            .enumerate()
            .map(|(k, spec)| match spec.kind {
                AttributeKind::Numeric => {
                    let bins = |rows: &[usize]| {
                        let mut h = vec![0; HISTOGRAM_BINS];
                        for &i in rows {
                            let q = a.maps.eval(k, a.samples.get(i).values[k]);
                            h[((q * HISTOGRAM_BINS as f64).floor() as usize).min(HISTOGRAM_BINS - 1)] += 1;
                        }
                        h
                    };
                    Histogram::Numeric { attribute: k, name: spec.name.clone(), covered: bins(&covered), all: bins(&train) }
                }
                AttributeKind::Categorical => {
                    let counts = |rows: &[usize]| {
                        let mut h = vec![0; spec.categories.len()];
                        for &i in rows {
                            h[a.samples.get(i).category(k)] += 1;
                        }
                        h
                    };
                    Histogram::Categorical {
                        attribute: k,
                        name: spec.name.clone(),
                        categories: spec.categories.clone(),
                        covered: counts(&covered),
                        all: counts(&train),
                    }
                }
            })
            .collect();
        Ok(RuleDetail { rule: self.rule_row(rule), covered_samples: covered, histograms })
    }

    fn matches(&self, predicates: &[(usize, &Predicate, Vec<usize>)], i: usize) -> bool {
        let s = self.analysis.samples.get(i);
        predicates.iter().all(|(a, p, cats)| match p {
            Predicate::Range { lower, upper, .. } => {
                let v = s.values[*a];
                lower.map_or(true, |l| v >= l) && upper.map_or(true, |u| v <= u)
            }
            Predicate::Categories { .. } => cats.contains(&s.category(*a)),
        })
    }

    /// Class distribution of the level's training samples before and after
    /// a conjunction of predicates. The predicates become the active filter.
    pub fn apply_filter(&mut self, predicates: Vec<Predicate>) -> Result<FilterResult> {
        let schema = &self.analysis.schema;
        let mut resolved = Vec::with_capacity(predicates.len());
        for p in &predicates {
            let (name, cats) = match p {
                Predicate::Range { attribute, lower, upper } => {
                    if let (Some(l), Some(u)) = (lower, upper) {
                        if l > u {
                            return Err(Error::InvalidArgument(format!("empty range on `{attribute}`")));
                        }
                    }
                    (attribute, Vec::new())
                }
                Predicate::Categories { attribute, categories } => (attribute, categories.clone()),
            };
            let a = self.attribute(name)?;
            let spec = &schema.attributes[a];
            let idx = match (p, spec.kind) {
                (Predicate::Range { .. }, AttributeKind::Numeric) => Vec::new(),
                (Predicate::Categories { .. }, AttributeKind::Categorical) => cats
                    .iter()
                    .map(|c| {
                        spec.category_index(c)
                            .ok_or_else(|| Error::InvalidArgument(format!("unknown category `{c}` of `{name}`")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                _ => return Err(Error::InvalidArgument(format!("predicate kind does not fit `{name}`"))),
            };
            resolved.push((a, p, idx));
        }
        let scope = &self.level().train_samples;
        let n_classes = schema.n_classes();
        let samples = &self.analysis.samples;
        let before = ClassDistribution::of(scope.iter().map(|&i| samples.get(i).label), n_classes);
        let matching: Vec<usize> = scope.iter().copied().filter(|&i| self.matches(&resolved, i)).collect();
        let after = ClassDistribution::of(matching.iter().map(|&i| samples.get(i).label), n_classes);
        self.filter = predicates;
        Ok(FilterResult { before, after, matching })
    }

    /// Training samples covered by the displayed rules, stably sorted by
    /// `sort` (sample id order otherwise), one page at a time.
    pub fn samples(&self, sort: Option<&str>, direction: Direction, page: usize) -> Result<SamplesPage> {
        let a = &self.analysis;
        let mut rows = a.covered_samples(&self.level().representatives, Split::Train);
        if let Some(name) = sort {
            let k = self.attribute(name)?;
            rows.sort_by(|&x, &y| {
                let o = a.samples.get(x).values[k].total_cmp(&a.samples.get(y).values[k]);
                match direction {
                    Direction::Asc => o,
                    Direction::Desc => o.reverse(),
                }
            });
        }
        let total = rows.len();
        let page_rows = rows
            .iter()
            .skip(page.saturating_mul(SAMPLE_PAGE_SIZE))
            .take(SAMPLE_PAGE_SIZE)
            .map(|&i| SampleRow {
                id: i,
                values: (0..a.schema.n_attributes()).map(|k| a.samples.display_value(&a.schema, i, k)).collect(),
                label: a.samples.get(i).label.map(|l| a.schema.classes[l].clone()),
                prediction: a.schema.classes[a.targets[i]].clone(),
            })
            .collect();
        Ok(SamplesPage {
            columns: a.schema.attributes.iter().map(|s| s.name.clone()).collect(),
            rows: page_rows,
            page,
            page_size: SAMPLE_PAGE_SIZE,
            total,
        })
    }

    pub fn info(&self) -> Info {
        let a = &self.analysis;
        let level = self.level();
        let reps = &level.representatives;
        let mut rules_per_label = vec![0; a.schema.n_classes()];
        for &j in reps {
            rules_per_label[a.rules[j].label] += 1;
        }
        let covered = a.covered_samples(reps, Split::Train);
        let mut samples_per_class = vec![0; a.schema.n_classes()];
        for &i in &covered {
            if let Some(l) = a.samples.get(i).label {
                samples_per_class[l] += 1;
            }
        }
        let mean = |f: &dyn Fn(usize) -> f64| {
            (!reps.is_empty()).then(|| sig6(reps.iter().map(|&j| f(j)).sum::<f64>() / reps.len() as f64))
        };
        Info {
            depth: level.depth,
            n_rules: reps.len(),
            rules_per_label,
            samples_per_class,
            mean_confidence: mean(&|j| a.rule_stats[j].confidence),
            mean_anomaly_score: mean(&|j| a.scores.get(j)),
            metrics: SelectionMetrics {
                fidelity_train: sig6_opt(level.metrics.fidelity_train),
                fidelity_test: sig6_opt(level.metrics.fidelity_test),
                average_anomaly_score: sig6_opt(level.metrics.average_anomaly_score),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.123456789), 0.123457);
        assert_eq!(sig6(123456789.0), 123457000.0);
        assert_eq!(sig6(0.0), 0.0);
        assert_eq!(sig6(-2.0 / 3.0), -0.666667);
    }
}
