#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use random_facet::facet::{run_with, FacetChooser, RunConfig};
use random_facet::instances::{errata_fixture, orientation_view, random_instance, random_tree, CubeEncoding};
use random_facet::{EdgeId, EdgeSubset, Instance, Rational, TreePolicy};

pub fn errata() -> (Instance, CubeEncoding) {
    let inst = errata_fixture().expect("fixture parses");
    let enc = orientation_view(&inst).expect("fixture is cube shaped").encoding;
    (inst, enc)
}

pub fn r(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Seeded random generic instances with at most five edges, each with a
/// random start tree.
pub fn small_instances(count: u64) -> Vec<(Instance, TreePolicy)> {
    const SHAPES: [(usize, usize); 5] = [(2, 2), (1, 3), (1, 4), (1, 5), (2, 2)];
    (0..count)
        .map(|seed| {
            let (n, d) = SHAPES[seed as usize % SHAPES.len()];
            let inst = random_instance(n, d, 6, 1000 + seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = random_tree(&inst, &mut rng);
            (inst, start)
        })
        .collect()
}

/// Follows `script` index by index, then always takes the first candidate,
/// recording how many candidates each choice had.
struct Scripted<'a> {
    script: &'a [usize],
    taken: Vec<usize>,
    widths: Vec<usize>,
}

impl FacetChooser for Scripted<'_> {
    fn choose(&mut self, candidates: &[EdgeId]) -> EdgeId {
        let i = self.script.get(self.taken.len()).copied().unwrap_or(0);
        self.taken.push(i);
        self.widths.push(candidates.len());
        candidates[i]
    }
}

pub struct Branch {
    pub probability: Rational,
    pub pivots: u64,
    pub final_tree: TreePolicy,
}

/// Every leaf of the Random-Facet decision tree, found by replaying the
/// runner under all choice scripts in odometer order.
pub fn rf_branches(inst: &Instance, facets: &EdgeSubset, start: &TreePolicy) -> Vec<Branch> {
    let mut out = Vec::new();
    let mut script: Vec<usize> = Vec::new();
    loop {
        let mut chooser = Scripted {
            script: &script,
            taken: Vec::new(),
            widths: Vec::new(),
        };
        let run = run_with(inst, facets, start, &mut chooser, RunConfig::default()).unwrap();
        let mut probability = Rational::one();
        for &w in &chooser.widths {
            probability /= BigInt::from(w);
        }
        out.push(Branch {
            probability,
            pivots: run.pivot_count,
            final_tree: run.final_tree,
        });
        let (taken, widths) = (chooser.taken, chooser.widths);
        match (0..taken.len()).rev().find(|&k| taken[k] + 1 < widths[k]) {
            Some(k) => {
                script = taken[..k].to_vec();
                script.push(taken[k] + 1);
            }
            None => return out,
        }
    }
}

pub fn rf_bruteforce(inst: &Instance, facets: &EdgeSubset, start: &TreePolicy) -> Rational {
    rf_branches(inst, facets, start)
        .into_iter()
        .map(|b| b.probability * Rational::from_integer(b.pivots.into()))
        .sum()
}
