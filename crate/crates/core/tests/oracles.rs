mod common;

use std::collections::HashMap;

use common::{errata, r, rf_branches, rf_bruteforce, small_instances};
use num_bigint::BigInt;
use num_traits::One;
use random_facet::exact::{comptree_shaped, for_each_permutation, ExactConfig, NodeKind, Shape};
use random_facet::facet::{run_with, FacetChooser, MinRankChooser, RunConfig};
use random_facet::{
    comptree, expected_pivots_rf, expected_pivots_rf_star, run_random_facet_star, EdgeId, Permutation,
    Rational, Rule,
};

#[test]
fn rf_matches_decision_tree_enumeration() {
    for (inst, start) in small_instances(40) {
        let full = inst.full_subset();
        assert_eq!(
            expected_pivots_rf(&inst, &full, &start).unwrap(),
            rf_bruteforce(&inst, &full, &start)
        );
    }
}

#[test]
fn decision_tree_enumeration_on_hand_example() {
    let (inst, enc) = errata();
    let b = enc.decode(&inst, "001").unwrap();
    let branches = rf_branches(&inst, &inst.full_subset(), &b);
    let total: Rational = branches.iter().map(|b| b.probability.clone()).sum();
    assert_eq!(total, Rational::one());
    assert_eq!(rf_bruteforce(&inst, &inst.full_subset(), &b), r(7, 3));
}

#[test]
fn comptree_sums_match_exact_engines() {
    for (inst, start) in small_instances(30) {
        let full = inst.full_subset();
        let f = expected_pivots_rf(&inst, &full, &start).unwrap();
        let f_star = expected_pivots_rf_star(&inst, &full, &start).unwrap();
        for shape in [Shape::Full, Shape::Collapsed] {
            for drop in [false, true] {
                let config = ExactConfig {
                    drop_leaving_edge: drop,
                    ..ExactConfig::default()
                };
                let rf = comptree_shaped(&inst, &full, &start, Rule::Rf, config, shape).unwrap();
                let star = comptree_shaped(&inst, &full, &start, Rule::RfStar, config, shape).unwrap();
                assert!(rf.probabilities_are_consistent());
                assert!(star.probabilities_are_consistent());
                assert_eq!(rf.expected_pivots(), f);
                assert_eq!(star.expected_pivots(), f_star);
            }
        }
    }
}

/// Records the facet chosen at each step while delegating to a permutation.
struct Recording<'a> {
    inner: MinRankChooser<'a>,
    picks: Vec<EdgeId>,
}

impl FacetChooser for Recording<'_> {
    fn choose(&mut self, candidates: &[EdgeId]) -> EdgeId {
        let e = self.inner.choose(candidates);
        self.picks.push(e);
        e
    }
}

#[test]
fn full_star_tree_partitions_permutations() {
    let (inst, enc) = errata();
    for start in ["001", "111", "010"] {
        let b = enc.decode(&inst, start).unwrap();
        let full = inst.full_subset();
        let mut by_path: HashMap<Vec<EdgeId>, u64> = HashMap::new();
        let edges: Vec<EdgeId> = full.iter().collect();
        for_each_permutation(&edges, |order| {
            let sigma = Permutation::from_order(order);
            let mut rec = Recording {
                inner: MinRankChooser(&sigma),
                picks: Vec::new(),
            };
            run_with(&inst, &full, &b, &mut rec, RunConfig::default()).unwrap();
            *by_path.entry(rec.picks).or_default() += 1;
        });
        let tree = comptree_shaped(
            &inst,
            &full,
            &b,
            Rule::RfStar,
            ExactConfig::default(),
            Shape::Full,
        )
        .unwrap();
        let leaves: Vec<usize> = tree.leaves().collect();
        assert_eq!(leaves.len(), by_path.len());
        for l in leaves {
            let mut picks = Vec::new();
            let mut cur = Some(l);
            while let Some(c) = cur {
                if let Some(e) = tree.node(c).via {
                    picks.push(e);
                }
                cur = tree.node(c).parent;
            }
            picks.reverse();
            let expected = Rational::new(BigInt::from(by_path[&picks]), BigInt::from(720));
            assert_eq!(tree.path_probability(l), expected, "path {picks:?}");
        }
    }
}

#[test]
fn leaving_edge_never_returns_in_its_second_call() {
    for (inst, start) in small_instances(30) {
        let full = inst.full_subset();
        let edges: Vec<EdgeId> = full.iter().collect();
        let drop = RunConfig {
            drop_leaving_edge: true,
            ..RunConfig::default()
        };
        for_each_permutation(&edges, |order| {
            let sigma = Permutation::from_order(order);
            let plain = run_random_facet_star(&inst, &full, &start, &sigma).unwrap();
            let dropped =
                random_facet::facet::run_random_facet_star_with(&inst, &full, &start, &sigma, drop).unwrap();
            assert_eq!(plain.trace, dropped.trace);
        });
    }
}

#[test]
fn rf_star_runs_replay_deterministically() {
    let (inst, enc) = errata();
    let b = enc.decode(&inst, "111").unwrap();
    let full = inst.full_subset();
    let order: Vec<EdgeId> = [4, 1, 2, 5, 0, 3].into_iter().map(EdgeId).collect();
    let sigma = Permutation::from_order(&order);
    let a = run_random_facet_star(&inst, &full, &b, &sigma).unwrap();
    let again = run_random_facet_star(&inst, &full, &b, &sigma).unwrap();
    assert_eq!(a.trace, again.trace);
    assert_eq!(a.trace_text(&inst), again.trace_text(&inst));
    assert_eq!(a.pivot_count as usize, a.trace.len());
}

#[test]
fn every_comptree_leaf_is_optimal() {
    let (inst, enc) = errata();
    let opt = random_facet::optimal_tree(&inst, &inst.full_subset()).unwrap();
    for start in 0..8 {
        let b = enc.tree(&inst, start);
        for rule in [Rule::Rf, Rule::RfStar] {
            let tree = comptree(&inst, &inst.full_subset(), &b, rule).unwrap();
            for l in tree.leaves() {
                match &tree.node(l).kind {
                    NodeKind::Leaf { tree, .. } => assert_eq!(tree, &opt),
                    _ => unreachable!(),
                }
            }
        }
    }
}
