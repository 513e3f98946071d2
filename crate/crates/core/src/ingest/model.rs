use std::path::Path;

use serde::{Deserialize, Serialize};

use super::gbt_text;
use super::samples::Sample;
use super::schema::{AttributeKind, DatasetSchema};
use crate::error::{Error, Location, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    RandomForest,
    GradientBoosted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    /// The JSON interchange document (`model_kind`, `base_scores`, `trees`).
    JsonInterchange,
    /// Line-oriented gradient-boosted-tree text dump.
    GbtText,
}

impl std::str::FromStr for ModelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" | "json_interchange" | "json-interchange" => Ok(ModelFormat::JsonInterchange),
            "gbt-text" | "gbt_text" => Ok(ModelFormat::GbtText),
            other => Err(Error::InvalidArgument(format!("unknown model format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplitTest {
    /// `x <= threshold` goes left.
    Threshold(f64),
    /// Categories (sorted indices) that go left.
    Categories(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LeafValue {
    /// Per-class training counts (random forests).
    Counts(Vec<f64>),
    /// Additive raw-score contribution (boosted trees).
    Score(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split { attr: usize, test: SplitTest, left: usize, right: usize },
    Leaf(LeafValue),
}

/// A binary tree stored as a node array rooted at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    /// Class whose raw score this tree adds to (multi-class boosting). `None`
    /// for forests and for binary boosting, where trees add to the positive
    /// class (index 1).
    pub target_class: Option<usize>,
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_for(&self, sample: &Sample) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(_) => return i,
                Node::Split { attr, test, left, right } => {
                    let goes_left = match test {
                        SplitTest::Threshold(t) => sample.values[*attr] <= *t,
                        SplitTest::Categories(cats) => {
                            cats.binary_search(&sample.category(*attr)).is_ok()
                        }
                    };
                    i = if goes_left { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub model_kind: ModelKind,
    pub trees: Vec<Tree>,
    /// Per-class raw score offsets; all zeros for forests.
    pub base_scores: Vec<f64>,
    pub n_classes: usize,
}

/// Index of the first maximum; the lowest class wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in scores.iter().enumerate().skip(1) {
        if v > scores[best] {
            best = c;
        }
    }
    best
}

impl TreeEnsemble {
    pub fn new(
        model_kind: ModelKind,
        trees: Vec<Tree>,
        base_scores: Vec<f64>,
        schema: &DatasetSchema,
    ) -> Result<Self> {
        let n_classes = schema.n_classes();
        let base_scores = match (model_kind, base_scores.len()) {
            (_, 0) => vec![0.0; n_classes],
            (ModelKind::GradientBoosted, n) if n == n_classes => base_scores,
            (ModelKind::RandomForest, n) if n == n_classes && base_scores.iter().all(|&b| b == 0.0) => {
                base_scores
            }
            (ModelKind::RandomForest, _) => {
                return Err(Error::InvalidModel("random forests take no base scores".into()))
            }
            (_, n) => {
                return Err(Error::InvalidModel(format!(
                    "expected {n_classes} base scores, found {n}"
                )))
            }
        };
        if base_scores.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidModel("non-finite base score".into()));
        }
        if trees.is_empty() {
            return Err(Error::InvalidModel("ensemble has no trees".into()));
        }
        let ensemble = TreeEnsemble { model_kind, trees, base_scores, n_classes };
        ensemble.validate(schema)?;
        Ok(ensemble)
    }

    fn validate(&self, schema: &DatasetSchema) -> Result<()> {
        for (t, tree) in self.trees.iter().enumerate() {
            validate_tree(t, tree, self.model_kind, schema)?;
        }
        Ok(())
    }

    pub fn leaf_count(&self) -> usize {
        self.trees.iter().map(Tree::leaf_count).sum()
    }

    /// Aggregated per-class scores: vote counts for forests, raw scores for
    /// boosted models.
    pub fn class_scores(&self, sample: &Sample) -> Vec<f64> {
        let mut scores = self.base_scores.clone();
        for tree in &self.trees {
            let leaf = tree.leaf_for(sample);
            match &tree.nodes[leaf] {
                Node::Leaf(LeafValue::Counts(counts)) => scores[argmax(counts)] += 1.0,
                Node::Leaf(LeafValue::Score(v)) => scores[tree.target_class.unwrap_or(1)] += v,
                Node::Split { .. } => unreachable!("leaf_for returns leaves"),
            }
        }
        scores
    }

    pub fn predict(&self, sample: &Sample) -> usize {
        argmax(&self.class_scores(sample))
    }

    pub fn to_json_string(&self) -> String {
        let doc = RawEnsemble {
            model_kind: self.model_kind,
            base_scores: if self.model_kind == ModelKind::RandomForest {
                Vec::new()
            } else {
                self.base_scores.clone()
            },
            trees: self
                .trees
                .iter()
                .map(|t| RawTree {
                    target_class: t.target_class,
                    nodes: t.nodes.iter().map(RawNode::from_node).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("ensemble serializes")
    }
}

fn validate_tree(t: usize, tree: &Tree, kind: ModelKind, schema: &DatasetSchema) -> Result<()> {
    let n = tree.nodes.len();
    if n == 0 {
        return Err(Error::InvalidModel(format!("tree {t} has no nodes")));
    }
    match (kind, tree.target_class) {
        (ModelKind::RandomForest, Some(_)) => {
            return Err(Error::InvalidModel(format!("tree {t}: forest trees have no target class")))
        }
        (ModelKind::GradientBoosted, Some(c)) if c >= schema.n_classes() => {
            return Err(Error::InvalidModel(format!("tree {t}: target class {c} out of range")))
        }
        (ModelKind::GradientBoosted, None) if schema.n_classes() != 2 => {
            return Err(Error::InvalidModel(format!(
                "tree {t}: multi-class boosted trees need a target class"
            )))
        }
        _ => {}
    }
    let mut parents = vec![0usize; n];
    for (i, node) in tree.nodes.iter().enumerate() {
        let at = Location::node(t, i);
        match node {
            Node::Split { attr, test, left, right } => {
                let spec = schema.attributes.get(*attr).ok_or_else(|| {
                    Error::mismatch(at.clone(), format!("unknown attribute index {attr}"))
                })?;
                match (test, spec.kind) {
                    (SplitTest::Threshold(th), AttributeKind::Numeric) => {
                        if th.is_nan() {
                            return Err(Error::InvalidModel(format!("{at}: NaN threshold")));
                        }
                    }
                    (SplitTest::Categories(cats), AttributeKind::Categorical) => {
                        if cats.windows(2).any(|w| w[0] >= w[1]) {
                            return Err(Error::InvalidModel(format!(
                                "{at}: category list must be sorted and unique"
                            )));
                        }
                        if cats.iter().any(|&c| c >= spec.categories.len()) {
                            return Err(Error::mismatch(at, "category index out of range"));
                        }
                    }
                    _ => {
                        return Err(Error::mismatch(
                            at,
                            format!("split kind does not match attribute `{}`", spec.name),
                        ))
                    }
                }
                for &child in [left, right] {
                    if child >= n || child == 0 {
                        return Err(Error::InvalidModel(format!("{at}: bad child index {child}")));
                    }
                    parents[child] += 1;
                }
            }
            Node::Leaf(LeafValue::Counts(counts)) => {
                if kind != ModelKind::RandomForest {
                    return Err(Error::InvalidModel(format!("{at}: boosted leaves hold a scalar")));
                }
                if counts.len() != schema.n_classes() {
                    return Err(Error::InvalidModel(format!(
                        "{at}: expected {} class counts, found {}",
                        schema.n_classes(),
                        counts.len()
                    )));
                }
                if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
                    return Err(Error::InvalidModel(format!("{at}: invalid class count")));
                }
            }
            Node::Leaf(LeafValue::Score(v)) => {
                if kind != ModelKind::GradientBoosted {
                    return Err(Error::InvalidModel(format!("{at}: forest leaves hold class counts")));
                }
                if !v.is_finite() {
                    return Err(Error::InvalidModel(format!("{at}: non-finite leaf value")));
                }
            }
        }
    }
    if let Some(i) = (1..n).find(|&i| parents[i] != 1) {
        return Err(Error::InvalidModel(format!(
            "tree {t}: node {i} has {} parents; nodes must form a single binary tree",
            parents[i]
        )));
    }
    // With one parent per non-root node and no edges into the root, a
    // reachability walk visiting every node rules out cycles.
    let mut stack = vec![0];
    let mut seen = vec![false; n];
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidModel(format!("tree {t}: cycle at node {i}")));
        }
        if let Node::Split { left, right, .. } = tree.nodes[i] {
            stack.push(left);
            stack.push(right);
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidModel(format!("tree {t}: node {i} is unreachable")));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct RawEnsemble {
    model_kind: ModelKind,
    #[serde(default)]
    base_scores: Vec<f64>,
    trees: Vec<RawTree>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawTree {
    #[serde(default)]
    target_class: Option<usize>,
    nodes: Vec<RawNode>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawLeaf {
    Scalar(f64),
    Counts(Vec<f64>),
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attr: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<AttributeKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leaf: Option<RawLeaf>,
}

impl RawNode {
    fn from_node(node: &Node) -> Self {
        match node {
            Node::Leaf(LeafValue::Counts(c)) => {
                RawNode { leaf: Some(RawLeaf::Counts(c.clone())), ..Default::default() }
            }
            Node::Leaf(LeafValue::Score(v)) => {
                RawNode { leaf: Some(RawLeaf::Scalar(*v)), ..Default::default() }
            }
            Node::Split { attr, test, left, right } => {
                let mut raw = RawNode {
                    attr: Some(*attr as i64),
                    left: Some(*left),
                    right: Some(*right),
                    ..Default::default()
                };
                match test {
                    SplitTest::Threshold(t) => {
                        raw.kind = Some(AttributeKind::Numeric);
                        raw.threshold = Some(*t);
                    }
                    SplitTest::Categories(c) => {
                        raw.kind = Some(AttributeKind::Categorical);
                        raw.categories = Some(c.clone());
                    }
                }
                raw
            }
        }
    }

    fn into_node(self, at: Location, schema: &DatasetSchema) -> Result<Node> {
        if let Some(leaf) = self.leaf {
            if self.left.is_some() || self.right.is_some() {
                return Err(Error::parse(at, "node has both a leaf value and children"));
            }
            return Ok(Node::Leaf(match leaf {
                RawLeaf::Scalar(v) => LeafValue::Score(v),
                RawLeaf::Counts(c) => LeafValue::Counts(c),
            }));
        }
        let (left, right) = match (self.left, self.right) {
            (Some(l), Some(r)) => (l, r),
            (None, None) => return Err(Error::parse(at, "missing leaf values")),
            _ => return Err(Error::parse(at, "non-binary node: needs both `left` and `right`")),
        };
        let attr = self.attr.ok_or_else(|| Error::parse(at.clone(), "split without `attr`"))?;
        if attr < 0 || attr as usize >= schema.n_attributes() {
            return Err(Error::mismatch(at, format!("unknown attribute index {attr}")));
        }
        let attr = attr as usize;
        let kind = self.kind.unwrap_or(schema.attributes[attr].kind);
        let test = match kind {
            AttributeKind::Numeric => SplitTest::Threshold(
                self.threshold
                    .ok_or_else(|| Error::parse(at.clone(), "numeric split without `threshold`"))?,
            ),
            AttributeKind::Categorical => {
                let mut cats = self
                    .categories
                    .ok_or_else(|| Error::parse(at.clone(), "categorical split without `categories`"))?;
                cats.sort_unstable();
                cats.dedup();
                SplitTest::Categories(cats)
            }
        };
        Ok(Node::Split { attr, test, left, right })
    }
}

pub fn parse_json_interchange(text: &str, schema: &DatasetSchema) -> Result<TreeEnsemble> {
    let raw: RawEnsemble = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            Location { row: Some(e.line()), ..Default::default() },
            format!("malformed model document: {e}"),
        )
    })?;
    let mut trees = Vec::with_capacity(raw.trees.len());
    for (t, rt) in raw.trees.into_iter().enumerate() {
        let nodes = rt
            .nodes
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.into_node(Location::node(t, i), schema))
            .collect::<Result<Vec<_>>>()?;
        trees.push(Tree { target_class: rt.target_class, nodes });
    }
    TreeEnsemble::new(raw.model_kind, trees, raw.base_scores, schema)
}

pub fn parse_ensemble_str(
    text: &str,
    format: ModelFormat,
    schema: &DatasetSchema,
) -> Result<TreeEnsemble> {
    match format {
        ModelFormat::JsonInterchange => parse_json_interchange(text, schema),
        ModelFormat::GbtText => gbt_text::parse_gbt_text(text, schema),
    }
}

pub fn parse_ensemble(
    path: impl AsRef<Path>,
    format: ModelFormat,
    schema: &DatasetSchema,
) -> Result<TreeEnsemble> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ensemble_str(&text, format, schema).map_err(|e| match e {
        Error::Parse { location, message } => {
            Error::Parse { location: location.with_file(path), message }
        }
        Error::Mismatch { location, message } => {
            Error::Mismatch { location: location.with_file(path), message }
        }
        other => other,
    })
}
