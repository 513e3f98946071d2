//! Row reordering that maximizes runs of alike conditions, one attribute at a
//! time. Each stage only permutes rows inside the groups left by earlier
//! stages and never changes an earlier stage's score. Up to eight rows are
//! solved exactly; larger inputs use greedy chains and 2-opt.

use serde::Serialize;

use super::similarity::linked;
use crate::features::QuantileMaps;
use crate::ingest::Rule;

/// Groups up to this size are solved by full enumeration.
pub const EXACT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reordering {
    /// Rule ids in display order.
    pub order: Vec<usize>,
    /// After each stage, the half-open row ranges of its groups. Each
    /// stage's ranges refine the previous stage's.
    pub boundaries: Vec<Vec<(usize, usize)>>,
}

/// Pairwise link tables, one per stage attribute.
struct Links {
    n: usize,
    tables: Vec<Vec<bool>>,
}

impl Links {
    fn new(rules: &[&Rule], attrs: &[usize], tau: f64, maps: &QuantileMaps) -> Self {
        let n = rules.len();
        let tables = attrs
            .iter()
            .map(|&attr| {
                let mut t = vec![false; n * n];
                for a in 0..n {
                    for b in a + 1..n {
                        let l = linked(rules[a], rules[b], attr, tau, maps);
                        t[a * n + b] = l;
                        t[b * n + a] = l;
                    }
                }
                t
            })
            .collect();
        Links { n, tables }
    }

    fn w(&self, k: usize, a: usize, b: usize) -> usize {
        usize::from(self.tables[k][a * self.n + b])
    }

    fn score(&self, k: usize, seq: &[usize]) -> usize {
        seq.windows(2).map(|p| self.w(k, p[0], p[1])).sum()
    }

    /// Score of `rows` between optional fixed neighbors.
    fn bounded(&self, k: usize, rows: &[usize], left: Option<usize>, right: Option<usize>) -> usize {
        let mut s = self.score(k, rows);
        if let (Some(l), Some(&f)) = (left, rows.first()) {
            s += self.w(k, l, f);
        }
        if let (Some(r), Some(&b)) = (right, rows.last()) {
            s += self.w(k, b, r);
        }
        s
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Best arrangement of `rows` for stage `k` by enumeration, keeping every
/// earlier stage's bounded score. The input order wins ties.
fn exact(links: &Links, k: usize, rows: &[usize], left: Option<usize>, right: Option<usize>) -> Vec<usize> {
    let keep: Vec<usize> = (0..k).map(|e| links.bounded(e, rows, left, right)).collect();
    let mut best = rows.to_vec();
    let mut best_score = links.bounded(k, rows, left, right);
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    let mut cand = vec![0; rows.len()];
    while next_permutation(&mut idx) {
        for (c, &i) in cand.iter_mut().zip(&idx) {
            *c = rows[i];
        }
        let s = links.bounded(k, &cand, left, right);
        if s > best_score && (0..k).all(|e| links.bounded(e, &cand, left, right) == keep[e]) {
            best_score = s;
            best.copy_from_slice(&cand);
        }
    }
    best
}

/// Best arrangement of all of `perm` for stage `k` that keeps every row
/// inside its group and every earlier stage's total score. The input order
/// wins ties.
fn exact_joint(links: &Links, k: usize, perm: &[usize], groups: &[(usize, usize)]) -> Vec<usize> {
    let n = perm.len();
    let mut group_of = vec![0; n];
    for (g, &(s, e)) in groups.iter().enumerate() {
        group_of[s..e].iter_mut().for_each(|x| *x = g);
    }
    let keep: Vec<usize> = (0..k).map(|e| links.score(e, perm)).collect();
    let mut best = perm.to_vec();
    let mut best_score = links.score(k, perm);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut cand = vec![0; n];
    while next_permutation(&mut idx) {
        if idx.iter().enumerate().any(|(pos, &i)| group_of[pos] != group_of[i]) {
            continue;
        }
        for (c, &i) in cand.iter_mut().zip(&idx) {
            *c = perm[i];
        }
        let s = links.score(k, &cand);
        if s > best_score && (0..k).all(|e| links.score(e, &cand) == keep[e]) {
            best_score = s;
            best.copy_from_slice(&cand);
        }
    }
    best
}

/// Segment reversals that raise stage `k` while leaving earlier stages
/// unchanged, first improvement first, until none applies.
fn two_opt(links: &Links, k: usize, rows: &mut [usize], left: Option<usize>, right: Option<usize>) {
    let n = rows.len();
    if n < 2 {
        return;
    }
    let before = |rows: &[usize], i: usize| if i == 0 { left } else { Some(rows[i - 1]) };
    let after = |rows: &[usize], j: usize| if j + 1 == n { right } else { Some(rows[j + 1]) };
    let edge = |e: usize, a: Option<usize>, b: usize| a.map_or(0, |a| links.w(e, a, b)) as isize;
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n {
            for j in i + 1..n {
                let (p, q) = (before(rows, i), after(rows, j));
                let delta = |e: usize| {
                    edge(e, p, rows[j]) + edge(e, q, rows[i]) - edge(e, p, rows[i]) - edge(e, q, rows[j])
                };
                if delta(k) > 0 && (0..k).all(|e| delta(e) == 0) {
                    rows[i..=j].reverse();
                    improved = true;
                }
            }
        }
    }
}

/// Greedy chain from the lowest rule id, always stepping to the first
/// remaining row (in current order) linked to the chain's end.
fn greedy_chain(links: &Links, k: usize, rows: &[usize], ids: &[usize]) -> Vec<usize> {
    let mut remaining = rows.to_vec();
    let start = (0..remaining.len()).min_by_key(|&i| ids[remaining[i]]).unwrap();
    let mut chain = vec![remaining.remove(start)];
    while !remaining.is_empty() {
        let last = *chain.last().unwrap();
        let next = remaining.iter().position(|&r| links.w(k, last, r) == 1).unwrap_or(0);
        chain.push(remaining.remove(next));
    }
    chain
}

/// Connected components of stage `k`'s link graph over `rows`, each in
/// current order, ordered by first appearance.
fn components(links: &Links, k: usize, rows: &[usize]) -> Vec<Vec<usize>> {
    let mut comp = vec![usize::MAX; rows.len()];
    let mut count = 0;
    for s in 0..rows.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = count;
        let mut stack = vec![s];
        while let Some(a) = stack.pop() {
            for b in 0..rows.len() {
                if comp[b] == usize::MAX && links.w(k, rows[a], rows[b]) == 1 {
                    comp[b] = count;
                    stack.push(b);
                }
            }
        }
        count += 1;
    }
    (0..count).map(|c| (0..rows.len()).filter(|&i| comp[i] == c).map(|i| rows[i]).collect()).collect()
}

/// Unconstrained solve of one stage-one component.
fn solve_component(links: &Links, rows: &[usize], ids: &[usize]) -> Vec<usize> {
    if rows.len() <= EXACT_LIMIT {
        return exact(links, 0, rows, None, None);
    }
    let mut from_current = rows.to_vec();
    two_opt(links, 0, &mut from_current, None, None);
    let mut greedy = greedy_chain(links, 0, rows, ids);
    two_opt(links, 0, &mut greedy, None, None);
    if links.score(0, &greedy) > links.score(0, &from_current) {
        greedy
    } else {
        from_current
    }
}

/// Stage one: label blocks in order of first appearance, each split into
/// link components solved independently. Links never cross labels or
/// components, so concatenation loses nothing.
fn stage_one(links: &Links, rules: &[&Rule], perm: &[usize], ids: &[usize]) -> Vec<usize> {
    let mut labels: Vec<usize> = Vec::new();
    for &r in perm {
        if !labels.contains(&rules[r].label) {
            labels.push(rules[r].label);
        }
    }
    let mut out = Vec::with_capacity(perm.len());
    for label in labels {
        let block: Vec<usize> = perm.iter().copied().filter(|&r| rules[r].label == label).collect();
        for comp in components(links, 0, &block) {
            out.extend(solve_component(links, &comp, ids));
        }
    }
    out
}

fn split_groups(links: &Links, k: usize, perm: &[usize], groups: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &(s, e) in groups {
        let mut start = s;
        for i in s + 1..e {
            if links.w(k, perm[i - 1], perm[i]) == 0 {
                out.push((start, i));
                start = i;
            }
        }
        if start < e {
            out.push((start, e));
        }
    }
    out
}

/// Reorder `rules` (given in current display order) to maximize, in turn,
/// the number of adjacent same-label pairs alike on each attribute of
/// `attr_order`.
pub fn reorder_rules(rules: &[&Rule], attr_order: &[usize], tau: f64, maps: &QuantileMaps) -> Reordering {
    let n = rules.len();
    let ids: Vec<usize> = rules.iter().map(|r| r.id).collect();
    let links = Links::new(rules, attr_order, tau, maps);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut groups: Vec<(usize, usize)> = if n == 0 { Vec::new() } else { vec![(0, n)] };
    let mut boundaries = Vec::with_capacity(attr_order.len());
    for k in 0..attr_order.len() {
        if k == 0 {
            let candidate = stage_one(&links, rules, &perm, &ids);
            if links.score(0, &candidate) > links.score(0, &perm) {
                perm = candidate;
            }
        } else if n <= EXACT_LIMIT {
            perm = exact_joint(&links, k, &perm, &groups);
        } else {
            for &(s, e) in &groups {
                let left = s.checked_sub(1).map(|i| perm[i]);
                let right = perm.get(e).copied();
                if e - s <= EXACT_LIMIT {
                    let best = exact(&links, k, &perm[s..e], left, right);
                    perm[s..e].copy_from_slice(&best);
                } else {
                    two_opt(&links, k, &mut perm[s..e], left, right);
                }
            }
        }
        groups = split_groups(&links, k, &perm, &groups);
        boundaries.push(groups.clone());
    }
    Reordering { order: perm.iter().map(|&i| ids[i]).collect(), boundaries }
}
