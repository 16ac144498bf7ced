//! Executable Random-Facet and Random-Facet* recursions.
//!
//! Both algorithms share one recursion and differ only in how the facet to
//! remove is selected from `F \ B`: Random-Facet draws it uniformly from a
//! random source, Random-Facet* takes the minimum under a fixed permutation.
//! The second recursive call is a tail call on the same facet set, so it is
//! run as a loop; native stack depth is bounded by `|F \ B|`.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::graph::{pivot_unchecked, tree_distances, EdgeId, EdgeSubset, Instance, TreePolicy};

pub const DEFAULT_MAX_DEPTH: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("start tree is not contained in the facet set")]
    TreeNotInFacets,
    #[error("permutation does not rank facet {0}")]
    PermutationDomainTooSmall(EdgeId),
    #[error("recursion depth exceeded {0}")]
    DepthExceeded(usize),
}

/// A total order on a set of edges; `rank(a) < rank(b)` means `a` precedes `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    rank: Vec<Option<u32>>,
    order: Vec<EdgeId>,
}

impl Permutation {
    /// Builds the permutation that lists `order` first to last. Panics on a
    /// repeated edge.
    pub fn from_order(order: &[EdgeId]) -> Self {
        let cap = order.iter().map(|e| e.0 + 1).max().unwrap_or(0);
        let mut rank = vec![None; cap];
        for (i, e) in order.iter().enumerate() {
            assert!(rank[e.0].is_none(), "edge {e} repeated in permutation");
            rank[e.0] = Some(i as u32 + 1);
        }
        Permutation {
            rank,
            order: order.to_vec(),
        }
    }

    /// Rank in `1..=len`, or `None` outside the domain.
    pub fn rank(&self, e: EdgeId) -> Option<u32> {
        self.rank.get(e.0).copied().flatten()
    }

    pub fn precedes(&self, a: EdgeId, b: EdgeId) -> bool {
        self.rank(a) < self.rank(b)
    }

    pub fn order(&self) -> &[EdgeId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Where a pivot was performed: in the top-level call, inside a first
/// recursive call `(F \ {e}, B)`, or inside a second recursive call `(F, B'')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CallKind {
    Root,
    First,
    Second,
}

impl CallKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CallKind::Root => "root",
            CallKind::First => "first",
            CallKind::Second => "second",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotEvent {
    pub entering: EdgeId,
    pub leaving: EdgeId,
    pub depth: usize,
    pub call_kind: CallKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub final_tree: TreePolicy,
    pub pivot_count: u64,
    pub trace: Vec<PivotEvent>,
}

impl RunResult {
    /// One line per pivot: `depth call_kind entering leaving`.
    pub fn trace_text(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for ev in &self.trace {
            writeln!(
                out,
                "{} {} {} {}",
                ev.depth,
                ev.call_kind.as_str(),
                inst.edge_name(ev.entering),
                inst.edge_name(ev.leaving)
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub max_depth: usize,
    /// Remove the displaced edge from the facet set of the second recursive
    /// call. Such an edge can never improve inside that call, so this does
    /// not change the pivot sequence.
    pub drop_leaving_edge: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_depth: DEFAULT_MAX_DEPTH,
            drop_leaving_edge: false,
        }
    }
}

/// Selects the facet to remove from the candidates `F \ B`, which are passed
/// in ascending id order.
pub trait FacetChooser {
    fn choose(&mut self, candidates: &[EdgeId]) -> EdgeId;
}

/// One bounded draw per selection.
pub struct UniformChooser<'a, R: Rng + ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> FacetChooser for UniformChooser<'_, R> {
    fn choose(&mut self, candidates: &[EdgeId]) -> EdgeId {
        candidates[self.0.gen_range(0..candidates.len())]
    }
}

pub struct MinRankChooser<'a>(pub &'a Permutation);

impl FacetChooser for MinRankChooser<'_> {
    fn choose(&mut self, candidates: &[EdgeId]) -> EdgeId {
        *candidates
            .iter()
            .min_by_key(|&&e| self.0.rank(e))
            .expect("non-empty candidates")
    }
}

pub fn run_random_facet<R: Rng + ?Sized>(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    rng: &mut R,
) -> Result<RunResult, RunError> {
    run_with(
        inst,
        facets,
        start,
        &mut UniformChooser(rng),
        RunConfig::default(),
    )
}

pub fn run_random_facet_star(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    sigma: &Permutation,
) -> Result<RunResult, RunError> {
    run_random_facet_star_with(inst, facets, start, sigma, RunConfig::default())
}

pub fn run_random_facet_star_with(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    sigma: &Permutation,
    config: RunConfig,
) -> Result<RunResult, RunError> {
    if let Some(e) = facets.iter().find(|&e| sigma.rank(e).is_none()) {
        return Err(RunError::PermutationDomainTooSmall(e));
    }
    run_with(inst, facets, start, &mut MinRankChooser(sigma), config)
}

/// The shared recursion, driven by an arbitrary chooser.
pub fn run_with<C: FacetChooser + ?Sized>(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    chooser: &mut C,
    config: RunConfig,
) -> Result<RunResult, RunError> {
    if !start.as_subset().is_subset(facets) {
        return Err(RunError::TreeNotInFacets);
    }
    let mut runner = Runner {
        inst,
        chooser,
        config,
        trace: Vec::new(),
    };
    let final_tree = runner.solve(facets.clone(), start.clone(), 0, CallKind::Root)?;
    Ok(RunResult {
        final_tree,
        pivot_count: runner.trace.len() as u64,
        trace: runner.trace,
    })
}

struct Runner<'a, C: ?Sized> {
    inst: &'a Instance,
    chooser: &'a mut C,
    config: RunConfig,
    trace: Vec<PivotEvent>,
}

impl<C: FacetChooser + ?Sized> Runner<'_, C> {
    fn solve(
        &mut self,
        mut facets: EdgeSubset,
        mut tree: TreePolicy,
        mut depth: usize,
        mut kind: CallKind,
    ) -> Result<TreePolicy, RunError> {
        loop {
            if depth > self.config.max_depth {
                return Err(RunError::DepthExceeded(self.config.max_depth));
            }
            let candidates: Vec<EdgeId> = facets.difference(tree.as_subset()).collect();
            if candidates.is_empty() {
                return Ok(tree);
            }
            let e = self.chooser.choose(&candidates);
            debug_assert!(candidates.contains(&e));
            let inner = self.solve(facets.without(e), tree, depth + 1, CallKind::First)?;
            if !tree_distances(self.inst, &inner).improves(self.inst, e) {
                return Ok(inner);
            }
            let leaving = inner
                .choice(self.inst.edge(e).tail)
                .expect("tail of a facet is a non-target vertex");
            self.trace.push(PivotEvent {
                entering: e,
                leaving,
                depth,
                call_kind: kind,
            });
            if self.config.drop_leaving_edge {
                facets.remove(leaving);
            }
            tree = pivot_unchecked(self.inst, &inner, e);
            depth += 1;
            kind = CallKind::Second;
        }
    }
}
