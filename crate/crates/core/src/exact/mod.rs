//! Exact expected pivot counts.
//!
//! `f(F, B)` for Random-Facet is evaluated by its defining recursion,
//! memoized on `(F, B)`. That is only sound when the first recursive call's
//! result is a function of `(F, e)`, so every optimum encountered is checked
//! for uniqueness. Random-Facet* admits no such recursion over `(F, B)`:
//! after a pivot the order restricted to the new `F \ B''` is no longer
//! uniform. Its expectation is therefore an average over all `|F|!`
//! permutations.

pub mod comptree;
pub mod linext;

use std::collections::HashMap;
use std::thread;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::facet::{run_random_facet_star_with, Permutation, RunConfig, RunError};
use crate::graph::{
    optimum_is_unique, pivot_unchecked, solve_subset, EdgeId, EdgeSubset, GraphError, Instance, OptimalTree,
    TreePolicy,
};

pub use comptree::{comptree, comptree_shaped, comptree_with, CompNode, CompTree, NodeKind, Rule, Shape};
pub use linext::{
    conditional_order_probability, count_linear_extensions, count_linear_extensions_bounded,
    count_linear_extensions_dp, ConstraintSet,
};

pub type Rational = BigRational;

/// Default largest facet set whose permutations are enumerated.
pub const DEFAULT_MAX_STAR_FACETS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("instance is not generic: the optimum over {facets} is not unique")]
    NonGenericInstance { facets: String },
    #[error("{size} facets exceed the enumeration bound {bound}; use Monte Carlo simulation instead")]
    EnumerationBoundExceeded { size: usize, bound: usize },
    #[error("universe of {universe} elements exceeds the bound {bound}")]
    UniverseTooLarge { universe: usize, bound: usize },
    #[error("element {element} is outside the universe 0..{universe}")]
    ElementOutOfRange { element: usize, universe: usize },
    #[error("conditioning constraints admit no order")]
    ConditioningOnEmptySet,
    #[error("start tree is not contained in the facet set")]
    TreeNotInFacets,
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactConfig {
    pub max_star_facets: usize,
    /// Drop the displaced edge from each second recursive call.
    pub drop_leaving_edge: bool,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            max_star_facets: DEFAULT_MAX_STAR_FACETS,
            drop_leaving_edge: false,
        }
    }
}

/// Always `p/q`, including integers (`0/1`).
pub fn fraction(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn expected_pivots_rf(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
) -> Result<Rational, ExactError> {
    expected_pivots_rf_with(inst, facets, start, ExactConfig::default())
}

pub fn expected_pivots_rf_with(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    config: ExactConfig,
) -> Result<Rational, ExactError> {
    if !start.as_subset().is_subset(facets) {
        return Err(ExactError::TreeNotInFacets);
    }
    let mut eval = RfEvaluator {
        inst,
        drop_leaving_edge: config.drop_leaving_edge,
        memo: HashMap::new(),
        optima: HashMap::new(),
    };
    eval.optimum(facets)?;
    eval.value(facets, start)
}

struct RfEvaluator<'a> {
    inst: &'a Instance,
    drop_leaving_edge: bool,
    memo: HashMap<(EdgeSubset, TreePolicy), Rational>,
    optima: HashMap<EdgeSubset, OptimalTree>,
}

impl RfEvaluator<'_> {
    fn optimum(&mut self, facets: &EdgeSubset) -> Result<&OptimalTree, ExactError> {
        if !self.optima.contains_key(facets) {
            let opt = solve_subset(self.inst, facets)?;
            if !optimum_is_unique(self.inst, facets, &opt) {
                return Err(ExactError::NonGenericInstance {
                    facets: self.inst.format_edges(facets.iter()),
                });
            }
            self.optima.insert(facets.clone(), opt);
        }
        Ok(&self.optima[facets])
    }

    fn value(&mut self, facets: &EdgeSubset, tree: &TreePolicy) -> Result<Rational, ExactError> {
        let key = (facets.clone(), tree.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let candidates: Vec<EdgeId> = facets.difference(tree.as_subset()).collect();
        if candidates.is_empty() {
            return Ok(Rational::zero());
        }
        let mut sum = Rational::zero();
        for &e in &candidates {
            let reduced = facets.without(e);
            sum += self.value(&reduced, tree)?;
            let inst = self.inst;
            let opt = self.optimum(&reduced)?;
            if opt.dist.improves(inst, e) {
                let leaving = opt.tree.choice(inst.edge(e).tail).unwrap();
                let next = pivot_unchecked(inst, &opt.tree, e);
                let next_facets = if self.drop_leaving_edge {
                    facets.without(leaving)
                } else {
                    facets.clone()
                };
                sum += Rational::one() + self.value(&next_facets, &next)?;
            }
        }
        let v = sum / Rational::from_integer(BigInt::from(candidates.len()));
        self.memo.insert(key, v.clone());
        Ok(v)
    }
}

pub fn expected_pivots_rf_star(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
) -> Result<Rational, ExactError> {
    expected_pivots_rf_star_with(inst, facets, start, ExactConfig::default())
}

/// Mean Random-Facet* pivot count over every permutation of `facets`.
/// Permutations are partitioned by their first element across threads; the
/// partial sums are integers, so the result does not depend on scheduling.
pub fn expected_pivots_rf_star_with(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    config: ExactConfig,
) -> Result<Rational, ExactError> {
    if !start.as_subset().is_subset(facets) {
        return Err(ExactError::TreeNotInFacets);
    }
    let members: Vec<EdgeId> = facets.iter().collect();
    if members.len() > config.max_star_facets {
        return Err(ExactError::EnumerationBoundExceeded {
            size: members.len(),
            bound: config.max_star_facets,
        });
    }
    let run_config = RunConfig {
        drop_leaving_edge: config.drop_leaving_edge,
        ..RunConfig::default()
    };
    let count_all = |order: &[EdgeId]| -> Result<(u64, u64), RunError> {
        let mut total = 0u64;
        let mut perms = 0u64;
        let mut err = None;
        let (head, rest) = order.split_at(1.min(order.len()));
        for_each_permutation(rest, |tail| {
            if err.is_some() {
                return;
            }
            let full: Vec<EdgeId> = head.iter().chain(tail).copied().collect();
            let sigma = Permutation::from_order(&full);
            match run_random_facet_star_with(inst, facets, start, &sigma, run_config) {
                Ok(r) => {
                    total += r.pivot_count;
                    perms += 1;
                }
                Err(e) => err = Some(e),
            }
        });
        err.map_or(Ok((total, perms)), Err)
    };

    let partials: Vec<Result<(u64, u64), RunError>> = if members.len() <= 1 {
        vec![count_all(&members)]
    } else {
        let orders: Vec<Vec<EdgeId>> = (0..members.len())
            .map(|i| {
                let mut o = members.clone();
                o.swap(0, i);
                o
            })
            .collect();
        thread::scope(|s| {
            let handles: Vec<_> = orders.iter().map(|o| s.spawn(|| count_all(o))).collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    };
    let mut total = 0u64;
    let mut perms = 0u64;
    for p in partials {
        let (t, n) = p?;
        total += t;
        perms += n;
    }
    Ok(Rational::new(BigInt::from(total), BigInt::from(perms)))
}

/// Visits every ordering of `items` (Heap's algorithm).
pub fn for_each_permutation<T: Copy>(items: &[T], mut visit: impl FnMut(&[T])) {
    let mut a = items.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    visit(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            visit(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
