mod common;

use std::collections::BTreeSet;

use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rulelens::features::{attribute_usage_weights, weighted_distance};
use rulelens::hierarchy::{assign_hidden, Navigator};
use rulelens::ingest::Split;
use rulelens::{Error, ReduceOptions};

fn options() -> ReduceOptions {
    ReduceOptions::fixed(5, 0.5, 0.5)
}

#[test]
fn assignment_matches_brute_force_nearest_representative() {
    let a = random_analysis(21, 3, 2, 60, 2);
    assert!(a.n_rules() >= 9);
    let reps = vec![0, 4, 7];
    let hidden = vec![1, 2, 3, 5, 6, 8];
    let weights = attribute_usage_weights(a.rules.iter().take(9), &a.schema);
    let got = assign_hidden(&a, &reps, &hidden, &weights).unwrap();
    for &h in &hidden {
        let d: Vec<f64> =
            reps.iter().map(|&r| weighted_distance(&a.features[h], &a.features[r], &weights).unwrap()).collect();
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let first = reps[d.iter().position(|&x| x == min).unwrap()];
        assert_eq!(got[&h], first, "hidden rule {h}");
    }
}

#[test]
fn equidistant_hidden_rule_goes_to_the_lower_id() {
    let a = random_analysis(22, 2, 1, 30, 2);
    let weights = attribute_usage_weights(a.rules.iter(), &a.schema);
    // a rule is equidistant from two copies of itself
    let got = assign_hidden(&a, &[1, 0], &[0], &weights).unwrap();
    assert_eq!(got[&0], 0);
    let zero = rulelens::features::AttributeWeights {
        per_attribute: vec![0.0; a.schema.n_attributes()],
        per_slot: vec![0.0; weights.per_slot.len()],
    };
    let got = assign_hidden(&a, &[3, 2], &[0, 1], &zero).unwrap();
    assert!(got.values().all(|&r| r == 2));
}

#[test]
fn zoom_scope_is_the_union_of_neighborhood_coverage() {
    let a = random_analysis(31, 10, 3, 120, 2);
    let mut nav = Navigator::new(&a, options()).unwrap();
    let root = nav.current().clone();
    assert_eq!(root.representatives.len(), 5);
    assert_eq!(root.scope_rules(), a.all_rule_ids());
    let picked = vec![root.representatives[0], root.representatives[2]];
    let level = nav.zoom_in(&a, &picked).unwrap().clone();

    let mut hood: BTreeSet<usize> = picked.iter().copied().collect();
    hood.extend(root.assignment.iter().filter(|(_, r)| picked.contains(r)).map(|(&h, _)| h));
    let expected: BTreeSet<usize> = hood
        .iter()
        .flat_map(|&j| {
            let a = &a;
            (0..a.samples.len()).filter(move |&i| a.rules[j].covers(a.samples.get(i)))
        })
        .filter(|&i| a.samples.get(i).split == Split::Train)
        .collect();
    assert_eq!(level.train_samples, expected.into_iter().collect::<Vec<_>>());
    assert_eq!(level.scope_rules(), hood.into_iter().collect::<Vec<_>>());
    for p in &picked {
        assert!(level.is_representative(*p));
        assert_eq!(level.parents[p], *p);
    }
    for (r, parent) in &level.parents {
        assert!(picked.contains(parent));
        if !picked.contains(r) {
            assert_eq!(root.assignment[r], *parent);
        }
    }
}

#[test]
fn zoom_errors() {
    let a = random_analysis(41, 8, 3, 80, 2);
    let mut nav = Navigator::new(&a, options()).unwrap();
    assert!(matches!(nav.zoom_out(), Err(Error::Navigation(_))));
    assert!(matches!(nav.zoom_in(&a, &[]), Err(Error::InvalidArgument(_))));
    let hidden = *nav.current().assignment.keys().next().unwrap();
    assert!(matches!(nav.zoom_in(&a, &[hidden]), Err(Error::InvalidArgument(_))));
    assert_eq!(nav.depth(), 0);
}

#[test]
fn randomized_zoom_sequences_keep_invariants() {
    for seed in 0..20u64 {
        let a = random_analysis(100 + seed, 10, 3, 100, 2 + (seed as usize % 2));
        let mut r = rng(seed);
        let mut nav = Navigator::new(&a, options()).unwrap();
        for _ in 0..3 {
            let cur = nav.current().clone();
            let mut reps = cur.representatives.clone();
            reps.shuffle(&mut r);
            let k = r.gen_range(1..=2.min(reps.len()));
            let picked: Vec<usize> = reps[..k].to_vec();
            let Ok(next) = nav.zoom_in(&a, &picked) else { break };
            let next = next.clone();
            for p in &picked {
                assert!(next.is_representative(*p));
            }
            let prev_scope: BTreeSet<usize> = cur.scope_rules().into_iter().collect();
            assert!(next.scope_rules().iter().all(|j| prev_scope.contains(j)));
            let prev_train: BTreeSet<usize> = cur.train_samples.iter().copied().collect();
            assert!(next.train_samples.iter().all(|i| prev_train.contains(i)));
            assert!(next.representatives.len() <= 5.max(picked.len()));
        }
        let replayed = Navigator::replay(&a, options(), nav.selection_log()).unwrap();
        assert_eq!(replayed, nav);
        let depth = nav.depth();
        if depth > 0 {
            let before = nav.levels()[depth - 1].clone();
            nav.zoom_out().unwrap();
            assert_eq!(nav.current(), &before);
        }
    }
}
