//! Probability-annotated computation trees.
//!
//! The recursion is replayed by a small continuation machine whose only
//! nondeterminism is the facet choice. Unfolding the machine at every
//! choice yields the tree of all executions. Under Random-Facet each branch
//! has probability `1/|F \ B|`. Under Random-Facet* the executions reaching
//! a node are exactly the permutations in which every earlier chosen facet
//! preceded the other candidates of its choice, so a branch probability is a
//! ratio of linear-extension counts of those history constraints.
//!
//! In the collapsed shape, a call whose every execution produces the same
//! pivot sequence is shown as that sequence. Its internal choices are merged,
//! and the merged executions cover every permutation, so it adds no history
//! constraints.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::linext::{count_linear_extensions_dp, ConstraintSet};
use super::{fraction, ExactConfig, ExactError, Rational};
use crate::graph::{pivot_unchecked, tree_distances, EdgeId, EdgeSubset, Instance, TreePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Rf,
    RfStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shape {
    /// One choice node per facet choice.
    Full,
    /// Calls with a single possible pivot sequence become pivot chains.
    #[default]
    Collapsed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// A facet is removed from `facets \ tree`.
    Choice {
        facets: EdgeSubset,
        tree: TreePolicy,
        depth: usize,
    },
    /// A pivot, after which the second recursive call starts.
    Pivot { entering: EdgeId, leaving: EdgeId },
    /// The run has returned.
    Leaf { pivots: u64, tree: TreePolicy },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompNode {
    pub parent: Option<usize>,
    /// The facet chosen at the parent, when the parent is a choice node.
    pub via: Option<EdgeId>,
    /// Probability of this node given its parent.
    pub prob: Rational,
    pub kind: NodeKind,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CompTree {
    rule: Rule,
    nodes: Vec<CompNode>,
}

pub fn comptree(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    rule: Rule,
) -> Result<CompTree, ExactError> {
    comptree_with(inst, facets, start, rule, ExactConfig::default())
}

pub fn comptree_with(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    rule: Rule,
    config: ExactConfig,
) -> Result<CompTree, ExactError> {
    comptree_shaped(inst, facets, start, rule, config, Shape::default())
}

pub fn comptree_shaped(
    inst: &Instance,
    facets: &EdgeSubset,
    start: &TreePolicy,
    rule: Rule,
    config: ExactConfig,
    shape: Shape,
) -> Result<CompTree, ExactError> {
    if !start.as_subset().is_subset(facets) {
        return Err(ExactError::TreeNotInFacets);
    }
    let universe: Vec<EdgeId> = facets.iter().collect();
    if rule == Rule::RfStar && universe.len() > config.max_star_facets {
        return Err(ExactError::EnumerationBoundExceeded {
            size: universe.len(),
            bound: config.max_star_facets,
        });
    }
    let machine = Machine::new(inst, config.drop_leaving_edge, facets.clone(), start.clone(), 0);
    let mut builder = Builder {
        rule,
        shape,
        universe,
        history: ConstraintSet::new(),
        nodes: Vec::new(),
        forced: HashMap::new(),
    };
    builder.grow(None, None, Rational::one(), machine)?;
    Ok(CompTree {
        rule,
        nodes: builder.nodes,
    })
}

#[derive(Clone)]
struct Frame {
    facets: EdgeSubset,
    tree: TreePolicy,
    /// Facet removed for the first recursive call still running above.
    pending: Option<EdgeId>,
    depth: usize,
}

enum Step {
    Choose(Vec<EdgeId>),
    Pivot { entering: EdgeId, leaving: EdgeId },
    Done(TreePolicy),
}

#[derive(Clone)]
struct Machine<'a> {
    inst: &'a Instance,
    drop_leaving_edge: bool,
    stack: Vec<Frame>,
    ret: Option<TreePolicy>,
    pivots: u64,
}

impl<'a> Machine<'a> {
    fn new(
        inst: &'a Instance,
        drop_leaving_edge: bool,
        facets: EdgeSubset,
        tree: TreePolicy,
        depth: usize,
    ) -> Self {
        Machine {
            inst,
            drop_leaving_edge,
            stack: vec![Frame {
                facets,
                tree,
                pending: None,
                depth,
            }],
            ret: None,
            pivots: 0,
        }
    }

    fn step(&mut self) -> Step {
        loop {
            if let Some(result) = self.ret.take() {
                let Some(frame) = self.stack.last_mut() else {
                    return Step::Done(result);
                };
                let e = frame.pending.take().expect("caller awaits its first call");
                if tree_distances(self.inst, &result).improves(self.inst, e) {
                    let leaving = result.choice(self.inst.edge(e).tail).unwrap();
                    frame.tree = pivot_unchecked(self.inst, &result, e);
                    if self.drop_leaving_edge {
                        frame.facets.remove(leaving);
                    }
                    frame.depth += 1;
                    self.pivots += 1;
                    return Step::Pivot { entering: e, leaving };
                }
                self.stack.pop();
                self.ret = Some(result);
                continue;
            }
            let frame = self.stack.last().expect("machine not finished");
            let candidates: Vec<EdgeId> = frame.facets.difference(frame.tree.as_subset()).collect();
            if candidates.is_empty() {
                let done = self.stack.pop().unwrap();
                self.ret = Some(done.tree);
                continue;
            }
            return Step::Choose(candidates);
        }
    }

    fn choose(&mut self, e: EdgeId) {
        let top = self.stack.last_mut().unwrap();
        top.pending = Some(e);
        let child = Frame {
            facets: top.facets.without(e),
            tree: top.tree.clone(),
            pending: None,
            depth: top.depth + 1,
        };
        self.stack.push(child);
    }

    /// Completes the call on top of the stack as if it had returned `result`
    /// after `pivots` pivots.
    fn finish_call(&mut self, result: TreePolicy, pivots: u64) {
        self.stack.pop();
        self.ret = Some(result);
        self.pivots += pivots;
    }
}

type PivotSequence = Vec<(EdgeId, EdgeId)>;

/// The pivot sequence and result shared by every execution of the call
/// `(facets, tree)`, or `None` if two executions differ.
fn single_outcome(
    inst: &Instance,
    drop_leaving_edge: bool,
    facets: &EdgeSubset,
    tree: &TreePolicy,
) -> Option<(PivotSequence, TreePolicy)> {
    fn explore(
        mut m: Machine<'_>,
        seq: &mut PivotSequence,
        seen: &mut Option<(PivotSequence, TreePolicy)>,
    ) -> bool {
        let mark = seq.len();
        let ok = loop {
            match m.step() {
                Step::Pivot { entering, leaving } => seq.push((entering, leaving)),
                Step::Done(result) => match seen {
                    Some((s, r)) => break *s == *seq && *r == result,
                    None => {
                        *seen = Some((seq.clone(), result));
                        break true;
                    }
                },
                Step::Choose(candidates) => {
                    break candidates.iter().all(|&e| {
                        let mut next = m.clone();
                        next.choose(e);
                        explore(next, seq, seen)
                    });
                }
            }
        };
        seq.truncate(mark);
        ok
    }
    let machine = Machine::new(inst, drop_leaving_edge, facets.clone(), tree.clone(), 0);
    let mut seen = None;
    if explore(machine, &mut Vec::new(), &mut seen) {
        seen
    } else {
        None
    }
}

struct Builder {
    rule: Rule,
    shape: Shape,
    universe: Vec<EdgeId>,
    history: ConstraintSet,
    nodes: Vec<CompNode>,
    forced: HashMap<(EdgeSubset, TreePolicy), Option<(PivotSequence, TreePolicy)>>,
}

impl Builder {
    fn push(&mut self, parent: Option<usize>, via: Option<EdgeId>, prob: Rational, kind: NodeKind) -> usize {
        let id = self.nodes.len();
        self.nodes.push(CompNode {
            parent,
            via,
            prob,
            kind,
            children: Vec::new(),
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        id
    }

    fn slot(&self, e: EdgeId) -> usize {
        self.universe.binary_search(&e).expect("facet in universe")
    }

    fn branch_probabilities(&self, candidates: &[EdgeId]) -> Result<Vec<Rational>, ExactError> {
        let k = candidates.len();
        match self.rule {
            Rule::Rf => Ok(vec![Rational::new(BigInt::one(), BigInt::from(k)); k]),
            Rule::RfStar => {
                let n = self.universe.len();
                let reaching = count_linear_extensions_dp(n, &self.history)?;
                candidates
                    .iter()
                    .map(|&e| {
                        let mut h = self.history.clone();
                        for &o in candidates.iter().filter(|&&o| o != e) {
                            h.push(self.slot(e), self.slot(o));
                        }
                        let hits = count_linear_extensions_dp(n, &h)?;
                        Ok(Rational::new(BigInt::from(hits), BigInt::from(reaching)))
                    })
                    .collect()
            }
        }
    }

    fn grow(
        &mut self,
        parent: Option<usize>,
        via: Option<EdgeId>,
        prob: Rational,
        mut machine: Machine<'_>,
    ) -> Result<(), ExactError> {
        match machine.step() {
            Step::Done(tree) => {
                let pivots = machine.pivots;
                self.push(parent, via, prob, NodeKind::Leaf { pivots, tree });
            }
            Step::Pivot { entering, leaving } => {
                let id = self.push(parent, via, prob, NodeKind::Pivot { entering, leaving });
                self.grow(Some(id), None, Rational::one(), machine)?;
            }
            Step::Choose(candidates) => {
                let top = machine.stack.last().unwrap();
                if self.shape == Shape::Collapsed {
                    let key = (top.facets.clone(), top.tree.clone());
                    let outcome = self
                        .forced
                        .entry(key)
                        .or_insert_with(|| {
                            single_outcome(machine.inst, machine.drop_leaving_edge, &top.facets, &top.tree)
                        })
                        .clone();
                    if let Some((seq, result)) = outcome {
                        machine.finish_call(result, seq.len() as u64);
                        let (mut parent, mut via, mut prob) = (parent, via, prob);
                        for (entering, leaving) in seq {
                            let id = self.push(parent, via, prob, NodeKind::Pivot { entering, leaving });
                            (parent, via, prob) = (Some(id), None, Rational::one());
                        }
                        return self.grow(parent, via, prob, machine);
                    }
                }
                let kind = NodeKind::Choice {
                    facets: top.facets.clone(),
                    tree: top.tree.clone(),
                    depth: top.depth,
                };
                let id = self.push(parent, via, prob, kind);
                let probs = self.branch_probabilities(&candidates)?;
                for (&e, p) in candidates.iter().zip(probs) {
                    if p.is_zero() {
                        continue;
                    }
                    let mut next = machine.clone();
                    next.choose(e);
                    let mark = self.history.len();
                    if self.rule == Rule::RfStar {
                        for &o in candidates.iter().filter(|&&o| o != e) {
                            self.history.push(self.slot(e), self.slot(o));
                        }
                    }
                    self.grow(Some(id), Some(e), p, next)?;
                    self.history.truncate(mark);
                }
            }
        }
        Ok(())
    }
}

impl CompTree {
    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn nodes(&self) -> &[CompNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &CompNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Child of a choice node reached by choosing `e`.
    pub fn child_via(&self, id: usize, e: EdgeId) -> Option<usize> {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].via == Some(e))
    }

    /// Probability of `e` at choice node `id`; zero if `e` is not a branch.
    pub fn branch_probability(&self, id: usize, e: EdgeId) -> Rational {
        self.child_via(id, e)
            .map_or_else(Rational::zero, |c| self.nodes[c].prob.clone())
    }

    /// First choice node below `id` after a pivot entering `e`, following
    /// only single-child nodes.
    pub fn choice_after_pivot(&self, id: usize, e: EdgeId) -> Option<usize> {
        let mut cur = id;
        let mut entered = false;
        loop {
            let node = &self.nodes[cur];
            match node.kind {
                NodeKind::Pivot { entering, .. } => {
                    entered |= entering == e;
                    cur = node.children[0];
                }
                NodeKind::Choice { .. } if entered => return Some(cur),
                _ => return None,
            }
        }
    }

    /// Probability of reaching `id` from the root.
    pub fn path_probability(&self, id: usize) -> Rational {
        let mut p = Rational::one();
        let mut cur = Some(id);
        while let Some(c) = cur {
            p *= &self.nodes[c].prob;
            cur = self.nodes[c].parent;
        }
        p
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| matches!(self.nodes[i].kind, NodeKind::Leaf { .. }))
    }

    pub fn leaf_pivots(&self, id: usize) -> Option<u64> {
        match self.nodes[id].kind {
            NodeKind::Leaf { pivots, .. } => Some(pivots),
            _ => None,
        }
    }

    /// Σ over leaves of path probability × pivot count.
    pub fn expected_pivots(&self) -> Rational {
        self.leaves()
            .map(|l| self.path_probability(l) * Rational::from_integer(self.leaf_pivots(l).unwrap().into()))
            .sum()
    }

    /// Exact distribution of the total pivot count.
    pub fn pivot_distribution(&self) -> BTreeMap<u64, Rational> {
        let mut dist: BTreeMap<u64, Rational> = BTreeMap::new();
        for l in self.leaves() {
            *dist
                .entry(self.leaf_pivots(l).unwrap())
                .or_insert_with(Rational::zero) += self.path_probability(l);
        }
        dist
    }

    /// Branch probabilities sum to one at every choice node, and leaf
    /// probabilities sum to one overall.
    pub fn probabilities_are_consistent(&self) -> bool {
        let choices_ok = self.nodes.iter().all(|n| match n.kind {
            NodeKind::Choice { .. } => {
                n.children
                    .iter()
                    .map(|&c| &self.nodes[c].prob)
                    .sum::<BigRational>()
                    == Rational::one()
            }
            NodeKind::Pivot { .. } => {
                n.children.len() == 1 && self.nodes[n.children[0]].prob == Rational::one()
            }
            NodeKind::Leaf { .. } => n.children.is_empty(),
        });
        choices_ok
            && self
                .leaves()
                .map(|l| self.path_probability(l))
                .sum::<BigRational>()
                == Rational::one()
    }

    /// One node per line: `id parent kind edge prob pivots detail`, with `-`
    /// for absent fields.
    pub fn to_text(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for (id, n) in self.nodes.iter().enumerate() {
            let parent = n.parent.map_or("-".to_owned(), |p| p.to_string());
            let edge = n.via.map_or("-".to_owned(), |e| inst.edge_name(e));
            let (kind, pivots, detail) = match &n.kind {
                NodeKind::Choice { facets, tree, .. } => (
                    "choice",
                    "-".to_owned(),
                    format!("F\\B={}", inst.format_edges(facets.difference(tree.as_subset()))),
                ),
                NodeKind::Pivot { entering, leaving } => (
                    "pivot",
                    "-".to_owned(),
                    format!("{}/{}", inst.edge_name(*entering), inst.edge_name(*leaving)),
                ),
                NodeKind::Leaf { pivots, tree } => (
                    "leaf",
                    pivots.to_string(),
                    format!("B={}", inst.format_edges(tree.edges())),
                ),
            };
            writeln!(
                out,
                "{id} {parent} {kind} {edge} {} {pivots} {detail}",
                fraction(&n.prob)
            )
            .unwrap();
        }
        out
    }

    pub fn to_dot(&self, inst: &Instance) -> String {
        let mut out = String::from("digraph comptree {\n  node [shape=box, fontname=\"monospace\"];\n");
        for (id, n) in self.nodes.iter().enumerate() {
            let label = match &n.kind {
                NodeKind::Choice { facets, tree, .. } => {
                    format!(
                        "F\\\\B = {}",
                        inst.format_edges(facets.difference(tree.as_subset()))
                    )
                }
                NodeKind::Pivot { entering, leaving } => {
                    format!(
                        "pivot {} / {}",
                        inst.edge_name(*entering),
                        inst.edge_name(*leaving)
                    )
                }
                NodeKind::Leaf { pivots, .. } => format!("pivots = {pivots}"),
            };
            let shape = match n.kind {
                NodeKind::Choice { .. } => "box",
                NodeKind::Pivot { .. } => "ellipse",
                NodeKind::Leaf { .. } => "plaintext",
            };
            writeln!(out, "  n{id} [label=\"{label}\", shape={shape}];").unwrap();
            if let Some(p) = n.parent {
                let via = n
                    .via
                    .map(|e| format!("{} ", inst.edge_name(e)))
                    .unwrap_or_default();
                writeln!(out, "  n{p} -> n{id} [label=\"{via}{}\"];", fraction(&n.prob)).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RawInstance;

    #[test]
    fn base_case_is_a_single_leaf() {
        let inst = Instance::validate(RawInstance::new("t").edge("v", "t", 0).edge("v", "t", 5)).unwrap();
        let b = TreePolicy::from_edges(&inst, [EdgeId(1)]).unwrap();
        for rule in [Rule::Rf, Rule::RfStar] {
            let t = comptree_shaped(
                &inst,
                b.as_subset(),
                &b,
                rule,
                ExactConfig::default(),
                Shape::Full,
            )
            .unwrap();
            assert_eq!(t.len(), 1);
            assert_eq!(t.to_text(&inst), "0 - leaf - 1/1 0 B={v1}\n");
        }
    }

    #[test]
    fn one_vertex_tree_shape() {
        let inst = Instance::validate(RawInstance::new("t").edge("v", "t", 0).edge("v", "t", 5)).unwrap();
        let b = TreePolicy::from_edges(&inst, [EdgeId(1)]).unwrap();
        let full = inst.full_subset();
        let t = comptree_shaped(&inst, &full, &b, Rule::Rf, ExactConfig::default(), Shape::Full).unwrap();
        let text = t.to_text(&inst);
        assert_eq!(
            text,
            "0 - choice - 1/1 - F\\B={v0}\n1 0 pivot v0 1/1 - v0/v1\n2 1 choice - 1/1 - F\\B={v1}\n3 2 leaf v1 1/1 1 B={v0}\n"
        );
        assert!(t.probabilities_are_consistent());
        assert_eq!(t.expected_pivots(), Rational::one());
        let dot = t.to_dot(&inst);
        assert!(dot.starts_with("digraph comptree {"));
        assert!(dot.contains("n0 -> n1 [label=\"v0 1/1\"]"));

        let c = comptree(&inst, &full, &b, Rule::RfStar).unwrap();
        assert_eq!(
            c.to_text(&inst),
            "0 - pivot - 1/1 - v0/v1\n1 0 leaf - 1/1 1 B={v0}\n"
        );
        assert_eq!(c.expected_pivots(), Rational::one());
        assert_eq!(c.choice_after_pivot(0, EdgeId(0)), None);
        assert_eq!(t.choice_after_pivot(1, EdgeId(0)), Some(2));
        assert_eq!(t.branch_probability(0, EdgeId(0)), Rational::one());
        assert!(t.branch_probability(0, EdgeId(1)).is_zero());
    }
}
