//! Reader for the line-oriented gradient-boosted-tree text dump (`Tree=N`
//! blocks of `key=value` arrays).
//!
//! Child indices follow the dump convention: non-negative values are internal
//! nodes, negative values `-(leaf + 1)` are leaves. Categorical splits set bit
//! 0 of `decision_type`; their `threshold` indexes `cat_boundaries`, which
//! delimits 32-bit words of `cat_threshold`. A category code goes left when
//! its bit is set. Category codes are the schema's category indices.

use std::collections::HashMap;

use super::model::{LeafValue, ModelKind, Node, SplitTest, Tree, TreeEnsemble};
use super::schema::{AttributeKind, DatasetSchema};
use crate::error::{Error, Location, Result};

struct Block<'a> {
    tree: usize,
    first_line: usize,
    fields: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Block<'a> {
    fn field(&self, key: &str) -> Option<(usize, &'a str)> {
        self.fields.get(key).copied()
    }

    fn loc(&self, line: usize) -> Location {
        Location { row: Some(line), tree: Some(self.tree), ..Default::default() }
    }

    fn array<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some((line, raw)) = self.field(key) else { return Ok(None) };
        raw.split_whitespace()
            .map(|tok| {
                tok.parse::<T>().map_err(|_| {
                    Error::parse(self.loc(line), format!("bad token `{tok}` in `{key}`"))
                })
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    fn required<T: std::str::FromStr>(&self, key: &str, len: usize) -> Result<Vec<T>> {
        let values = self
            .array::<T>(key)?
            .ok_or_else(|| Error::parse(self.loc(self.first_line), format!("missing `{key}`")))?;
        if values.len() != len {
            let (line, _) = self.field(key).unwrap();
            return Err(Error::parse(
                self.loc(line),
                format!("`{key}` has {} entries, expected {len}", values.len()),
            ));
        }
        Ok(values)
    }
}

pub fn parse_gbt_text(text: &str, schema: &DatasetSchema) -> Result<TreeEnsemble> {
    let mut header: HashMap<&str, (usize, &str)> = HashMap::new();
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.trim();
        if line == "end of trees" {
            break;
        }
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            if blocks.is_empty() {
                continue; // leading format tag such as `tree`
            }
            return Err(Error::parse(
                Location { row: Some(line_no), ..Default::default() },
                format!("expected `key=value`, found `{line}`"),
            ));
        };
        if key == "Tree" {
            let tree: usize = value.trim().parse().map_err(|_| {
                Error::parse(
                    Location { row: Some(line_no), ..Default::default() },
                    format!("bad tree index `{value}`"),
                )
            })?;
            blocks.push(Block { tree, first_line: line_no, fields: HashMap::new() });
        } else if let Some(block) = blocks.last_mut() {
            block.fields.insert(key, (line_no, value));
        } else {
            header.insert(key, (line_no, value));
        }
    }
    if blocks.is_empty() {
        return Err(Error::parse(Location::default(), "no `Tree=` blocks found"));
    }

    let header_usize = |key: &str, default: usize| -> Result<usize> {
        match header.get(key) {
            None => Ok(default),
            Some((line, v)) => v.trim().parse().map_err(|_| {
                Error::parse(Location { row: Some(*line), ..Default::default() }, format!("bad `{key}`"))
            }),
        }
    };
    let num_class = header_usize("num_class", 1)?;
    let per_iteration = header_usize("num_tree_per_iteration", num_class)?.max(1);
    let multiclass = num_class > 1;
    if multiclass && num_class != schema.n_classes() {
        return Err(Error::mismatch(
            Location::default(),
            format!("model has {num_class} classes, schema has {}", schema.n_classes()),
        ));
    }
    if !multiclass && schema.n_classes() != 2 {
        return Err(Error::mismatch(
            Location::default(),
            format!("single-output model needs a 2-class schema, found {}", schema.n_classes()),
        ));
    }

    // Feature indices in the dump refer to the training frame; map them to
    // schema attributes by name when the dump lists names.
    let feature_map: Option<Vec<Option<usize>>> = header
        .get("feature_names")
        .map(|(_, names)| names.split_whitespace().map(|n| schema.attribute_index(n)).collect());

    let mut trees = Vec::with_capacity(blocks.len());
    for (position, block) in blocks.iter().enumerate() {
        let target_class = multiclass.then_some(position % per_iteration);
        trees.push(parse_tree(block, schema, feature_map.as_deref(), target_class)?);
    }
    TreeEnsemble::new(ModelKind::GradientBoosted, trees, Vec::new(), schema)
}

fn parse_tree(
    block: &Block,
    schema: &DatasetSchema,
    feature_map: Option<&[Option<usize>]>,
    target_class: Option<usize>,
) -> Result<Tree> {
    if let Some((line, v)) = block.field("is_linear") {
        if v.trim() != "0" {
            return Err(Error::parse(block.loc(line), "linear trees are not supported"));
        }
    }
    let num_leaves: usize = match block.field("num_leaves") {
        Some((line, v)) => v
            .trim()
            .parse()
            .map_err(|_| Error::parse(block.loc(line), "bad `num_leaves`"))?,
        None => return Err(Error::parse(block.loc(block.first_line), "missing `num_leaves`")),
    };
    if num_leaves == 0 {
        return Err(Error::parse(block.loc(block.first_line), "tree without leaves"));
    }
    let leaf_values: Vec<f64> = block.array("leaf_value")?.ok_or_else(|| {
        Error::parse(block.loc(block.first_line), "missing leaf values (`leaf_value`)")
    })?;
    if leaf_values.len() != num_leaves {
        return Err(Error::parse(
            block.loc(block.field("leaf_value").unwrap().0),
            format!("`leaf_value` has {} entries, expected {num_leaves}", leaf_values.len()),
        ));
    }
    if num_leaves == 1 {
        return Ok(Tree { target_class, nodes: vec![Node::Leaf(LeafValue::Score(leaf_values[0]))] });
    }

    let n_internal = num_leaves - 1;
    let features: Vec<i64> = block.required("split_feature", n_internal)?;
    let thresholds: Vec<f64> = block.required("threshold", n_internal)?;
    let lefts: Vec<i64> = block.required("left_child", n_internal)?;
    let rights: Vec<i64> = block.required("right_child", n_internal)?;
    let decision: Vec<u32> = match block.array("decision_type")? {
        Some(d) if d.len() == n_internal => d,
        Some(_) => {
            return Err(Error::parse(
                block.loc(block.field("decision_type").unwrap().0),
                "`decision_type` length mismatch",
            ))
        }
        None => vec![0; n_internal],
    };
    let cat_boundaries: Vec<usize> = block.array("cat_boundaries")?.unwrap_or_default();
    let cat_words: Vec<u32> = block.array("cat_threshold")?.unwrap_or_default();

    let child_index = |c: i64| -> Result<usize> {
        if c >= 0 {
            let c = c as usize;
            if c >= n_internal {
                return Err(Error::parse(block.loc(block.first_line), format!("bad child {c}")));
            }
            Ok(c)
        } else {
            let leaf = (-c - 1) as usize;
            if leaf >= num_leaves {
                return Err(Error::parse(block.loc(block.first_line), format!("bad leaf {leaf}")));
            }
            Ok(n_internal + leaf)
        }
    };

    let mut nodes = Vec::with_capacity(n_internal + num_leaves);
    for i in 0..n_internal {
        let at = Location::node(block.tree, i);
        let raw_feature = features[i];
        let attr = usize::try_from(raw_feature)
            .ok()
            .and_then(|f| match feature_map {
                Some(map) => map.get(f).copied().flatten(),
                None => (f < schema.n_attributes()).then_some(f),
            })
            .ok_or_else(|| Error::mismatch(at.clone(), format!("unknown attribute index {raw_feature}")))?;
        let spec = &schema.attributes[attr];
        let categorical = decision[i] & 1 == 1;
        let test = match (categorical, spec.kind) {
            (false, AttributeKind::Numeric) => SplitTest::Threshold(thresholds[i]),
            (true, AttributeKind::Categorical) => {
                let t = thresholds[i];
                if t < 0.0 || t.fract() != 0.0 || t as usize + 1 >= cat_boundaries.len().max(1) {
                    return Err(Error::parse(at, "categorical threshold outside `cat_boundaries`"));
                }
                let (lo, hi) = (cat_boundaries[t as usize], cat_boundaries[t as usize + 1]);
                if lo > hi || hi > cat_words.len() {
                    return Err(Error::parse(at, "`cat_boundaries` exceed `cat_threshold`"));
                }
                let words = &cat_words[lo..hi];
                let cats = (0..spec.categories.len())
                    .filter(|&k| words.get(k / 32).is_some_and(|w| (w >> (k % 32)) & 1 == 1))
                    .collect();
                SplitTest::Categories(cats)
            }
            _ => {
                return Err(Error::mismatch(
                    at,
                    format!("split kind does not match attribute `{}`", spec.name),
                ))
            }
        };
        nodes.push(Node::Split {
            attr,
            test,
            left: child_index(lefts[i])?,
            right: child_index(rights[i])?,
        });
    }
    nodes.extend(leaf_values.into_iter().map(|v| Node::Leaf(LeafValue::Score(v))));
    Ok(Tree { target_class, nodes })
}
