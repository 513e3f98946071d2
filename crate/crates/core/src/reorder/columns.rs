use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::similarity::condition_similar;
use crate::features::QuantileMaps;
use crate::ingest::{Condition, Rule};

pub const DEFAULT_PAGE_SIZE: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeOrder {
    /// Attribute indices, pinned first.
    pub order: Vec<usize>,
    /// How many displayed rules test each attribute, by schema index.
    pub usage: Vec<usize>,
    pub page_size: usize,
}

impl AttributeOrder {
    pub fn pages(&self) -> Vec<Vec<usize>> {
        self.order.chunks(self.page_size.max(1)).map(<[usize]>::to_vec).collect()
    }

    /// Page holding each attribute, by schema index.
    pub fn page_of(&self) -> Vec<usize> {
        let mut page = vec![0; self.order.len()];
        for (pos, &a) in self.order.iter().enumerate() {
            page[a] = pos / self.page_size.max(1);
        }
        page
    }
}

/// Pinned attributes in the given order, then the rest by descending usage
/// with schema order breaking ties.
pub fn sort_attributes(rules: &[&Rule], n_attributes: usize, pinned: &[usize], page_size: usize) -> AttributeOrder {
    let mut usage = vec![0usize; n_attributes];
    for rule in rules {
        for &a in rule.conditions.keys() {
            usage[a] += 1;
        }
    }
    let mut order: Vec<usize> = Vec::with_capacity(n_attributes);
    for &a in pinned {
        if a < n_attributes && !order.contains(&a) {
            order.push(a);
        }
    }
    let mut rest: Vec<usize> = (0..n_attributes).filter(|a| !order.contains(a)).collect();
    rest.sort_by(|&a, &b| usage[b].cmp(&usage[a]).then(a.cmp(&b)));
    order.extend(rest);
    AttributeOrder { order, usage, page_size }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grouping {
    /// Rule ids in display order.
    pub order: Vec<usize>,
    /// Half-open row ranges of the groups. Rules not testing the attribute
    /// form the last range.
    pub groups: Vec<(usize, usize)>,
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

/// Group rules by their condition on `attr` and then by label: numeric
/// conditions ordered by lower then upper bound, category subsets by their
/// sorted indices. Rules not testing `attr` keep their order at the bottom.
pub fn group_by_attribute(rules: &[&Rule], attr: usize, tau: f64, maps: &QuantileMaps) -> Grouping {
    let (mut using, unused): (Vec<&Rule>, Vec<&Rule>) = rules.iter().copied().partition(|r| r.uses(attr));
    using.sort_by(|a, b| {
        let key = match (&a.conditions[&attr], &b.conditions[&attr]) {
            (Condition::Interval { lower: al, upper: au }, Condition::Interval { lower: bl, upper: bu }) => {
                cmp_f64(*al, *bl).then(cmp_f64(*au, *bu))
            }
            (Condition::Categories(x), Condition::Categories(y)) => x.cmp(y),
            _ => Ordering::Equal,
        };
        key.then(a.label.cmp(&b.label))
    });
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..using.len() {
        let (p, q) = (using[i - 1], using[i]);
        if p.label != q.label || !condition_similar(p, q, attr, tau, maps) {
            groups.push((start, i));
            start = i;
        }
    }
    if !using.is_empty() {
        groups.push((start, using.len()));
    }
    if !unused.is_empty() {
        groups.push((using.len(), using.len() + unused.len()));
    }
    let order = using.iter().chain(&unused).map(|r| r.id).collect();
    Grouping { order, groups }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Asc,
    Desc,
}

/// Stable sort of row positions by `values`.
pub fn sort_rules_by_metric(values: &[f64], direction: Direction) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = cmp_f64(values[a], values[b]);
        match direction {
            Direction::Asc => o,
            Direction::Desc => o.reverse(),
        }
    });
    idx
}

/// Up to three attributes with the largest rise in rank from `prev` to
/// `curr`; ties in rise go to the lower schema index.
pub fn rank_increase_arrows(prev: &[usize], curr: &[usize]) -> Vec<usize> {
    let rank = |order: &[usize], a: usize| order.iter().position(|&x| x == a);
    let mut rises: Vec<(isize, usize)> = curr
        .iter()
        .filter_map(|&a| {
            let (p, c) = (rank(prev, a)?, rank(curr, a)?);
            let delta = p as isize - c as isize;
            (delta > 0).then_some((delta, a))
        })
        .collect();
    rises.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    rises.into_iter().take(3).map(|(_, a)| a).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrows() {
        assert!(rank_increase_arrows(&[0, 1, 2], &[0, 1, 2]).is_empty());
        let prev: Vec<usize> = (0..10).collect();
        let curr = vec![9, 0, 1, 2, 3, 4, 5, 6, 7, 8];
        assert_eq!(rank_increase_arrows(&prev, &curr), vec![9]);
        // rises: 3 -> +3, 4 -> +2, the rest fall or stay
        let prev = vec![0, 1, 2, 3, 4, 5];
        assert_eq!(rank_increase_arrows(&prev, &[3, 0, 4, 1, 2, 5]), vec![3, 4]);
        // four attributes rise by 5; schema order breaks the tie
        let prev: Vec<usize> = (0..9).collect();
        assert_eq!(rank_increase_arrows(&prev, &[5, 6, 7, 8, 0, 1, 2, 3, 4]), vec![5, 6, 7]);
    }

    #[test]
    fn metric_sort_is_stable() {
        assert_eq!(sort_rules_by_metric(&[1.0, 1.0, 1.0], Direction::Desc), vec![0, 1, 2]);
        assert_eq!(sort_rules_by_metric(&[0.2, 0.9, 0.5, 0.9], Direction::Desc), vec![1, 3, 2, 0]);
        assert_eq!(sort_rules_by_metric(&[0.2, 0.9, 0.5], Direction::Asc), vec![0, 2, 1]);
    }
}
