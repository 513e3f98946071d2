//! Fixture loaders, random model generators and independent oracles shared by
//! the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rulelens::features::{build_quantile_maps, QuantileMaps};
use rulelens::ingest::{
    load_samples, load_schema, parse_ensemble, AttributeKind, AttributeSpec, Condition, DatasetSchema, LeafValue,
    ModelFormat, ModelKind, Node, Rule, RuleSource, Sample, SampleTable, Split, SplitTest, Tree, TreeEnsemble,
};
use rulelens::reduction::{ReductionProblem, VoteModel};
use rulelens::reorder::DEFAULT_TAU;
use rulelens::Analysis;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn credit() -> Analysis {
    Analysis::load(
        fixture("credit/rf200.json"),
        ModelFormat::JsonInterchange,
        fixture("credit/credit.csv"),
        fixture("credit/schema.json"),
    )
    .expect("credit fixture loads")
}

/// `binary` or `multiclass` boosted-tree fixture.
pub fn gbt(name: &str) -> Analysis {
    Analysis::load(
        fixture(&format!("gbt/{name}.txt")),
        ModelFormat::GbtText,
        fixture(&format!("gbt/{name}.csv")),
        fixture(&format!("gbt/{name}.schema.json")),
    )
    .expect("gbt fixture loads")
}

pub fn gbt_parts(name: &str) -> (DatasetSchema, SampleTable, TreeEnsemble) {
    let schema = load_schema(fixture(&format!("gbt/{name}.schema.json"))).unwrap();
    let samples = load_samples(fixture(&format!("gbt/{name}.csv")), &schema).unwrap();
    let ensemble = parse_ensemble(fixture(&format!("gbt/{name}.txt")), ModelFormat::GbtText, &schema).unwrap();
    (schema, samples, ensemble)
}

/// `n_numeric` numeric attributes `x0..`, then `n_categorical` categorical
/// attributes `c0..` with three or four categories.
pub fn random_schema(rng: &mut ChaCha8Rng, n_numeric: usize, n_categorical: usize, n_classes: usize) -> DatasetSchema {
    let mut attributes: Vec<AttributeSpec> = (0..n_numeric).map(|i| AttributeSpec::numeric(format!("x{i}"))).collect();
    for i in 0..n_categorical {
        let k = rng.gen_range(3..=4);
        attributes.push(AttributeSpec::categorical(format!("c{i}"), (0..k).map(|c| format!("v{c}")).collect::<Vec<_>>()));
    }
    DatasetSchema::new(attributes, (0..n_classes).map(|c| format!("k{c}")).collect()).unwrap()
}

/// Numeric values uniform on `[0, 10)`, categories uniform, labels uniform,
/// every `test_every`-th row in the test split (never when 0).
pub fn random_samples(rng: &mut ChaCha8Rng, schema: &DatasetSchema, n: usize, test_every: usize) -> SampleTable {
    let samples = (0..n)
        .map(|i| {
            let values = schema
                .attributes
                .iter()
                .map(|a| match a.kind {
                    AttributeKind::Numeric => rng.gen_range(0.0..10.0),
                    AttributeKind::Categorical => rng.gen_range(0..a.categories.len()) as f64,
                })
                .collect();
            let split = if test_every > 0 && i % test_every == 0 { Split::Test } else { Split::Train };
            Sample::new(values).with_label(rng.gen_range(0..schema.n_classes())).with_split(split)
        })
        .collect();
    SampleTable::new(samples, schema).unwrap()
}

#[derive(Clone)]
enum Domain {
    Numeric(f64, f64),
    Categorical(Vec<usize>),
}

fn grow(
    rng: &mut ChaCha8Rng,
    schema: &DatasetSchema,
    nodes: &mut Vec<Node>,
    domains: &[Domain],
    depth: usize,
    leaf: &mut dyn FnMut(&mut ChaCha8Rng) -> LeafValue,
) -> usize {
    let at = nodes.len();
    nodes.push(Node::Leaf(LeafValue::Score(0.0)));
    let splittable: Vec<usize> = (0..domains.len())
        .filter(|&a| match &domains[a] {
            Domain::Numeric(lo, hi) => hi - lo > 0.5,
            Domain::Categorical(c) => c.len() > 1,
        })
        .collect();
    if depth == 0 || splittable.is_empty() || rng.gen_bool(0.15) {
        nodes[at] = Node::Leaf(leaf(rng));
        return at;
    }
    let attr = *splittable.choose(rng).unwrap();
    let (test, left_dom, right_dom) = match &domains[attr] {
        Domain::Numeric(lo, hi) => {
            let t = (rng.gen_range(lo + 0.2..hi - 0.2) * 10.0).round() / 10.0;
            (SplitTest::Threshold(t), Domain::Numeric(*lo, t), Domain::Numeric(t, *hi))
        }
        Domain::Categorical(allowed) => {
            let mut shuffled = allowed.clone();
            shuffled.shuffle(rng);
            let k = rng.gen_range(1..allowed.len());
            let mut left: Vec<usize> = shuffled[..k].to_vec();
            let mut right: Vec<usize> = shuffled[k..].to_vec();
            left.sort_unstable();
            right.sort_unstable();
            // the split lists left-going categories among all of them
            (SplitTest::Categories(left.clone()), Domain::Categorical(left), Domain::Categorical(right))
        }
    };
    let mut ld = domains.to_vec();
    ld[attr] = left_dom;
    let left = grow(rng, schema, nodes, &ld, depth - 1, leaf);
    let mut rd = domains.to_vec();
    rd[attr] = right_dom;
    let right = grow(rng, schema, nodes, &rd, depth - 1, leaf);
    nodes[at] = Node::Split { attr, test, left, right };
    at
}

fn root_domains(schema: &DatasetSchema) -> Vec<Domain> {
    schema
        .attributes
        .iter()
        .map(|a| match a.kind {
            AttributeKind::Numeric => Domain::Numeric(0.0, 10.0),
            AttributeKind::Categorical => Domain::Categorical((0..a.categories.len()).collect()),
        })
        .collect()
}

pub fn random_tree(
    rng: &mut ChaCha8Rng,
    schema: &DatasetSchema,
    depth: usize,
    target_class: Option<usize>,
    leaf: &mut dyn FnMut(&mut ChaCha8Rng) -> LeafValue,
) -> Tree {
    let mut nodes = Vec::new();
    grow(rng, schema, &mut nodes, &root_domains(schema), depth, leaf);
    Tree { target_class, nodes }
}

/// Forest with random structure and random per-class leaf counts.
pub fn random_forest(rng: &mut ChaCha8Rng, schema: &DatasetSchema, n_trees: usize, depth: usize) -> TreeEnsemble {
    let c = schema.n_classes();
    let mut leaf = |r: &mut ChaCha8Rng| LeafValue::Counts((0..c).map(|_| r.gen_range(0..20) as f64).collect());
    let trees = (0..n_trees).map(|_| random_tree(rng, schema, depth, None, &mut leaf)).collect();
    TreeEnsemble::new(ModelKind::RandomForest, trees, Vec::new(), schema).unwrap()
}

/// Boosted model with signed leaf scores; one tree per class per round when
/// there are more than two classes.
pub fn random_gbt(rng: &mut ChaCha8Rng, schema: &DatasetSchema, rounds: usize, depth: usize) -> TreeEnsemble {
    let c = schema.n_classes();
    let mut leaf = |r: &mut ChaCha8Rng| LeafValue::Score(r.gen_range(-1.0..1.0));
    let mut trees = Vec::new();
    for _ in 0..rounds {
        if c == 2 {
            trees.push(random_tree(rng, schema, depth, None, &mut leaf));
        } else {
            for k in 0..c {
                trees.push(random_tree(rng, schema, depth, Some(k), &mut leaf));
            }
        }
    }
    let base = if c == 2 { vec![0.0, rng.gen_range(-0.5..0.5)] } else { (0..c).map(|_| rng.gen_range(-0.5..0.5)).collect() };
    TreeEnsemble::new(ModelKind::GradientBoosted, trees, base, schema).unwrap()
}

/// Small random forest analysis: 3 numeric and 1 categorical attribute.
pub fn random_analysis(seed: u64, n_trees: usize, depth: usize, n_samples: usize, n_classes: usize) -> Analysis {
    let mut r = rng(seed);
    let schema = random_schema(&mut r, 3, 1, n_classes);
    let samples = random_samples(&mut r, &schema, n_samples, 4);
    let ensemble = random_forest(&mut r, &schema, n_trees, depth);
    Analysis::new(schema, samples, ensemble).unwrap()
}

/// Random reduction instance: `m` rules each covering a random subset of
/// `n` samples, random labels, targets given by the all-rules vote.
pub fn random_problem(rng: &mut ChaCha8Rng, m: usize, n: usize, n_classes: usize, budget: usize) -> ReductionProblem {
    let density = rng.gen_range(0.2..0.6);
    let signed = rng.gen_bool(0.3);
    let rule_labels: Vec<usize> = (0..m).map(|_| rng.gen_range(0..n_classes)).collect();
    let rule_weights: Vec<f64> =
        (0..m).map(|_| if signed { rng.gen_range(-1.0..1.0) } else { 1.0 }).collect();
    let base_scores: Vec<f64> =
        if signed { (0..n_classes).map(|_| rng.gen_range(-0.3..0.3)).collect() } else { vec![0.0; n_classes] };
    let covering: Vec<Vec<usize>> =
        (0..n).map(|_| (0..m).filter(|_| rng.gen_bool(density)).collect()).collect();
    let targets = covering
        .iter()
        .map(|cov| {
            let mut y = base_scores.clone();
            for &j in cov {
                y[rule_labels[j]] += rule_weights[j];
            }
            rulelens::ingest::argmax(&y)
        })
        .collect();
    ReductionProblem {
        vote: VoteModel { n_classes, base_scores },
        rule_ids: (0..m).collect(),
        rule_labels,
        rule_weights,
        scores: (0..m).map(|_| rng.gen_range(0.0..1.0)).collect(),
        targets,
        covering,
        budget,
        xi: rng.gen_range(0.0..1.0),
        lambda: rng.gen_range(0.0..1.0),
        forced: Vec::new(),
    }
}

/// Straight-line loss of one sample: dense class scores, then the smallest
/// margin against every rival class.
pub fn oracle_hinge(problem: &ReductionProblem, z: &[f64], i: usize) -> f64 {
    let c = problem.vote.n_classes;
    let mut y = vec![0.0; c];
    for k in 0..c {
        y[k] = problem.vote.base_scores[k];
        for j in 0..problem.n_rules() {
            if problem.rule_labels[j] == k && problem.covering[i].contains(&j) {
                y[k] += z[j] * problem.rule_weights[j];
            }
        }
    }
    let l = problem.targets[i];
    let mut margin = f64::INFINITY;
    for k in 0..c {
        if k != l {
            margin = margin.min(y[l] - y[k]);
        }
    }
    if problem.xi - margin > 0.0 {
        problem.xi - margin
    } else {
        0.0
    }
}

pub fn oracle_objective(problem: &ReductionProblem, z: &[f64]) -> f64 {
    let n = problem.n_samples();
    let mut total = 0.0;
    for i in 0..n {
        total += oracle_hinge(problem, z, i);
    }
    let mut reward = 0.0;
    for j in 0..z.len() {
        reward += z[j] * problem.scores[j];
    }
    total / n as f64 - problem.lambda / problem.budget as f64 * reward
}

/// All `k`-subsets of `0..m` in lexicographic order.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..m {
            cur.push(j);
            rec(j + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Brute-force fidelity: rebuild each sample's vote from the rules that
/// cover it and compare with the original model.
pub fn oracle_fidelity(analysis: &Analysis, selected: &[usize], samples: &[usize]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut agree = 0;
    for &i in samples {
        let s = analysis.samples.get(i);
        let mut y = analysis.vote.base_scores.clone();
        for &j in selected {
            let r = &analysis.rules[j];
            if r.covers(s) {
                y[r.label] += r.weight;
            }
        }
        let mut best = 0;
        for c in 1..y.len() {
            if y[c] > y[best] {
                best = c;
            }
        }
        if best == analysis.ensemble.predict(s) {
            agree += 1;
        }
    }
    Some(agree as f64 / samples.len() as f64)
}

/// Every permutation of `0..n` by Heap's algorithm.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut out = Vec::new();
    heap(n, &mut (0..n).collect(), &mut out);
    out
}

pub struct ReorderFixture {
    pub schema: DatasetSchema,
    pub maps: QuantileMaps,
    pub rules: Vec<Rule>,
}

/// Rules over two numeric attributes and one categorical one, with interval
/// ends on a coarse grid so that alike conditions are common.
pub fn reorder_fixture(seed: u64, n_rules: usize) -> ReorderFixture {
    let mut r = rng(seed);
    let schema = DatasetSchema::new(
        vec![AttributeSpec::numeric("a"), AttributeSpec::numeric("b"), AttributeSpec::categorical("c", ["p", "q", "r"])],
        vec!["no".into(), "yes".into()],
    )
    .unwrap();
    let samples = (0..200)
        .map(|_| Sample::new(vec![r.gen_range(0.0..10.0), r.gen_range(0.0..10.0), r.gen_range(0..3) as f64]))
        .collect();
    let table = SampleTable::new(samples, &schema).unwrap();
    let maps = build_quantile_maps(&table, &schema).unwrap();
    let ends = [f64::NEG_INFINITY, 2.0, 2.5, 5.0, 5.5, 8.0, f64::INFINITY];
    let rules = (0..n_rules)
        .map(|id| {
            let mut conditions = BTreeMap::new();
            for a in 0..2 {
                if r.gen_bool(0.8) {
                    let i = r.gen_range(0..ends.len() - 1);
                    let j = r.gen_range(i + 1..ends.len());
                    if (i, j) != (0, ends.len() - 1) {
                        conditions.insert(a, Condition::Interval { lower: ends[i], upper: ends[j] });
                    }
                }
            }
            if r.gen_bool(0.6) {
                let subsets: [&[usize]; 3] = [&[0], &[1, 2], &[0, 2]];
                conditions.insert(2, Condition::Categories(subsets[r.gen_range(0..3)].to_vec()));
            }
            Rule { id, conditions, label: r.gen_range(0..2), weight: 1.0, source: RuleSource { tree: id, leaf: 0 } }
        })
        .collect();
    ReorderFixture { schema, maps, rules }
}

/// Link test coded from the definition: same label, both rules test the
/// attribute, identical category sets or both quantile ends within `tau`.
pub fn oracle_linked(f: &ReorderFixture, x: &Rule, y: &Rule, attr: usize, tau: f64) -> bool {
    if x.label != y.label {
        return false;
    }
    let (Some(cx), Some(cy)) = (x.conditions.get(&attr), y.conditions.get(&attr)) else { return false };
    match (cx, cy) {
        (Condition::Categories(p), Condition::Categories(q)) => p == q,
        (Condition::Interval { lower: l1, upper: u1 }, Condition::Interval { lower: l2, upper: u2 }) => {
            (f.maps.eval(attr, *l1) - f.maps.eval(attr, *l2)).abs() <= tau
                && (f.maps.eval(attr, *u1) - f.maps.eval(attr, *u2)).abs() <= tau
        }
        _ => false,
    }
}

pub fn oracle_score(f: &ReorderFixture, order: &[usize], attr: usize) -> usize {
    order.windows(2).filter(|w| oracle_linked(f, &f.rules[w[0]], &f.rules[w[1]], attr, DEFAULT_TAU)).count()
}
