//! Single-target shortest-path instances, tree policies, and the primitive
//! operations the pivoting algorithms are built from: tree distances, the
//! improvement test, the pivot itself, and a Bellman-Ford optimal-tree oracle.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

/// Dense vertex index. The target is always vertex 0.
pub type VertexId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
    pub cost: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEdge {
    pub id: usize,
    pub tail: String,
    pub head: String,
    pub cost: i64,
}

/// An instance exactly as written down, before any invariant has been checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInstance {
    pub target: String,
    pub edges: Vec<RawEdge>,
}

impl RawInstance {
    pub fn new(target: impl Into<String>) -> Self {
        RawInstance {
            target: target.into(),
            edges: Vec::new(),
        }
    }

    /// Appends an edge with the next free id.
    pub fn edge(mut self, tail: impl Into<String>, head: impl Into<String>, cost: i64) -> Self {
        let id = self.edges.len();
        self.edges.push(RawEdge {
            id,
            tail: tail.into(),
            head: head.into(),
            cost,
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ids must be exactly 0..{expected}: {detail}")]
    BadEdgeIds { expected: usize, detail: String },
    #[error("target `{0}` has outgoing edges")]
    TargetHasOutEdges(String),
    #[error("vertex `{0}` has no outgoing edge")]
    DanglingVertex(String),
    #[error("vertex `{0}` has no path to the target")]
    Unreachable(String),
    #[error("negative cycle: {}", .0.join(" -> "))]
    NegativeCycle(Vec<String>),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("edge {0} does not improve the tree")]
    NotImproving(EdgeId),
    #[error("edge subset contains no tree")]
    NoTreeInSubset,
    #[error("unknown edge {0}")]
    UnknownEdge(String),
}

/// A validated instance: every non-target vertex has an outgoing edge and a
/// path to the target, the target has no outgoing edges, and there is no
/// negative cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
}

pub fn validate_instance(raw: RawInstance) -> Result<Instance, GraphError> {
    Instance::validate(raw)
}

impl Instance {
    pub const TARGET: VertexId = 0;

    pub fn validate(mut raw: RawInstance) -> Result<Self, GraphError> {
        let m = raw.edges.len();
        raw.edges.sort_by_key(|e| e.id);
        for (pos, e) in raw.edges.iter().enumerate() {
            if e.id != pos {
                let detail = if pos > 0 && raw.edges[pos - 1].id == e.id {
                    format!("duplicate id {}", e.id)
                } else {
                    format!("missing id {pos}")
                };
                return Err(GraphError::BadEdgeIds { expected: m, detail });
            }
        }

        let mut names = vec![raw.target.clone()];
        let mut index = HashMap::from([(raw.target.clone(), 0)]);
        let mut intern = |name: &str| -> VertexId {
            if let Some(&v) = index.get(name) {
                return v;
            }
            names.push(name.to_owned());
            index.insert(name.to_owned(), names.len() - 1);
            names.len() - 1
        };
        // tails first, so vertex order is order of first appearance as a tail
        let tails: Vec<VertexId> = raw.edges.iter().map(|e| intern(&e.tail)).collect();
        let edges: Vec<Edge> = raw
            .edges
            .iter()
            .zip(tails)
            .map(|(e, tail)| Edge {
                id: EdgeId(e.id),
                tail,
                head: intern(&e.head),
                cost: e.cost,
            })
            .collect();

        let mut out = vec![Vec::new(); names.len()];
        for e in &edges {
            out[e.tail].push(e.id);
        }
        let inst = Instance {
            names,
            index,
            edges,
            out,
        };

        if !inst.out[Self::TARGET].is_empty() {
            return Err(GraphError::TargetHasOutEdges(inst.names[0].clone()));
        }
        if let Some(v) = inst.non_target_vertices().find(|&v| inst.out[v].is_empty()) {
            return Err(GraphError::DanglingVertex(inst.names[v].clone()));
        }
        if let Some(cycle) = inst.find_negative_cycle() {
            return Err(GraphError::NegativeCycle(
                cycle.into_iter().map(|v| inst.names[v].clone()).collect(),
            ));
        }
        let reach = inst.reaches_target(&inst.full_subset());
        if let Some(v) = inst.non_target_vertices().find(|&v| !reach[v]) {
            return Err(GraphError::Unreachable(inst.names[v].clone()));
        }
        Ok(inst)
    }

    /// Relaxation from an implicit zero-potential source; a change in round
    /// `|V|` proves a negative cycle, which is recovered by walking the
    /// predecessor edges.
    fn find_negative_cycle(&self) -> Option<Vec<VertexId>> {
        let nv = self.names.len();
        let mut dist = vec![0i64; nv];
        let mut pred: Vec<Option<EdgeId>> = vec![None; nv];
        let mut last_updated = None;
        for _ in 0..nv {
            last_updated = None;
            for e in &self.edges {
                let cand = e.cost + dist[e.head];
                if cand < dist[e.tail] {
                    dist[e.tail] = cand;
                    pred[e.tail] = Some(e.id);
                    last_updated = Some(e.tail);
                }
            }
            last_updated?;
        }
        let mut v = last_updated?;
        for _ in 0..nv {
            v = self.edges[pred[v]?.0].head;
        }
        let start = v;
        let mut cycle = vec![start];
        loop {
            v = self.edges[pred[v]?.0].head;
            if v == start {
                break;
            }
            cycle.push(v);
        }
        cycle.push(start);
        Some(cycle)
    }

    fn reaches_target(&self, facets: &EdgeSubset) -> Vec<bool> {
        let nv = self.names.len();
        let mut reach = vec![false; nv];
        reach[Self::TARGET] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for e in facets.iter().map(|id| &self.edges[id.0]) {
                if reach[e.head] && !reach[e.tail] {
                    reach[e.tail] = true;
                    changed = true;
                }
            }
        }
        reach
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            target: self.names[Self::TARGET].clone(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge {
                    id: e.id.0,
                    tail: self.names[e.tail].clone(),
                    head: self.names[e.head].clone(),
                    cost: e.cost,
                })
                .collect(),
        }
    }

    pub fn target(&self) -> VertexId {
        Self::TARGET
    }

    /// Number of vertices including the target.
    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    /// Number of non-target vertices.
    pub fn n(&self) -> usize {
        self.names.len() - 1
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn non_target_vertices(&self) -> impl Iterator<Item = VertexId> {
        1..self.names.len()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Outgoing edges of `v` in ascending id order.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn full_subset(&self) -> EdgeSubset {
        EdgeSubset::full(self.m())
    }

    /// Symbolic name `<tail><k>` where `k` is the position of the edge among
    /// the outgoing edges of its tail, e.g. `x0` and `x1`.
    pub fn edge_name(&self, e: EdgeId) -> String {
        let tail = self.edges[e.0].tail;
        let k = self.out[tail].iter().position(|&o| o == e).unwrap();
        format!("{}{}", self.names[tail], k)
    }

    /// Resolves either a numeric edge id or a symbolic `<tail><k>` name.
    pub fn parse_edge_ref(&self, token: &str) -> Result<EdgeId, GraphError> {
        let token = token.trim();
        if let Ok(id) = token.parse::<usize>() {
            if id < self.m() {
                return Ok(EdgeId(id));
            }
        }
        let digits = token.len() - token.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        // longest vertex-name prefix first
        for split in (token.len() - digits..token.len()).filter(|&s| s > 0) {
            let (name, k) = token.split_at(split);
            if let (Some(v), Ok(k)) = (self.vertex(name), k.parse::<usize>()) {
                if let Some(&e) = self.out[v].get(k) {
                    return Ok(e);
                }
            }
        }
        Err(GraphError::UnknownEdge(token.to_owned()))
    }

    pub fn parse_edge_list(&self, list: &str) -> Result<Vec<EdgeId>, GraphError> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| self.parse_edge_ref(s))
            .collect()
    }

    pub fn format_edges(&self, edges: impl IntoIterator<Item = EdgeId>) -> String {
        let names: Vec<String> = edges.into_iter().map(|e| self.edge_name(e)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// A set of edge ids, used for the active facet set `F`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSubset(FixedBitSet);

impl EdgeSubset {
    pub fn empty(m: usize) -> Self {
        EdgeSubset(FixedBitSet::with_capacity(m))
    }

    pub fn full(m: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(m);
        bits.insert_range(..);
        EdgeSubset(bits)
    }

    pub fn from_ids(m: usize, ids: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut s = Self::empty(m);
        for e in ids {
            s.insert(e);
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.0.contains(e.0)
    }

    pub fn insert(&mut self, e: EdgeId) {
        self.0.insert(e.0);
    }

    pub fn remove(&mut self, e: EdgeId) {
        self.0.set(e.0, false);
    }

    pub fn without(&self, e: EdgeId) -> Self {
        let mut s = self.clone();
        s.remove(e);
        s
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn is_subset(&self, other: &EdgeSubset) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Members in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.0.ones().map(EdgeId)
    }

    /// Members of `self` not in `other`, ascending.
    pub fn difference<'a>(&'a self, other: &'a EdgeSubset) -> impl Iterator<Item = EdgeId> + 'a {
        self.0.difference(&other.0).map(EdgeId)
    }
}

/// One outgoing edge per non-target vertex such that following the choices
/// from any vertex reaches the target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePolicy {
    choice: Vec<Option<EdgeId>>,
    members: EdgeSubset,
}

impl TreePolicy {
    pub fn from_edges(inst: &Instance, edges: impl IntoIterator<Item = EdgeId>) -> Result<Self, GraphError> {
        let mut choice = vec![None; inst.vertex_count()];
        for e in edges {
            if e.0 >= inst.m() {
                return Err(GraphError::UnknownEdge(e.to_string()));
            }
            let tail = inst.edge(e).tail;
            if choice[tail].replace(e).is_some() {
                return Err(GraphError::NotATree(format!(
                    "two edges chosen at `{}`",
                    inst.vertex_name(tail)
                )));
            }
        }
        if let Some(v) = inst.non_target_vertices().find(|&v| choice[v].is_none()) {
            return Err(GraphError::NotATree(format!(
                "no edge chosen at `{}`",
                inst.vertex_name(v)
            )));
        }
        let tree = Self::from_choice_unchecked(inst, choice);
        if let Some(v) = tree.first_cycle_vertex(inst) {
            return Err(GraphError::NotATree(format!(
                "`{}` does not reach the target",
                inst.vertex_name(v)
            )));
        }
        Ok(tree)
    }

    fn from_choice_unchecked(inst: &Instance, choice: Vec<Option<EdgeId>>) -> Self {
        let members = EdgeSubset::from_ids(inst.m(), choice.iter().flatten().copied());
        TreePolicy { choice, members }
    }

    fn first_cycle_vertex(&self, inst: &Instance) -> Option<VertexId> {
        // 0 = unknown, 1 = on current walk, 2 = reaches target
        let mut state = vec![0u8; inst.vertex_count()];
        state[Instance::TARGET] = 2;
        for start in inst.non_target_vertices() {
            let mut walk = Vec::new();
            let mut v = start;
            while state[v] == 0 {
                state[v] = 1;
                walk.push(v);
                v = inst.edge(self.choice[v].unwrap()).head;
            }
            if state[v] == 1 {
                return Some(start);
            }
            for w in walk {
                state[w] = 2;
            }
        }
        None
    }

    pub fn choice(&self, v: VertexId) -> Option<EdgeId> {
        self.choice[v]
    }

    /// Chosen edges in ascending id order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.members.iter()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.members.contains(e)
    }

    pub fn as_subset(&self) -> &EdgeSubset {
        &self.members
    }
}

/// Distance from every vertex to the target along a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    dist: Vec<i64>,
}

impl DistanceMap {
    pub fn get(&self, v: VertexId) -> i64 {
        self.dist[v]
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.dist
    }

    /// `cost(e) + d(head(e)) < d(tail(e))`
    pub fn improves(&self, inst: &Instance, e: EdgeId) -> bool {
        let edge = inst.edge(e);
        edge.cost + self.dist[edge.head] < self.dist[edge.tail]
    }

    pub fn is_tight(&self, inst: &Instance, e: EdgeId) -> bool {
        let edge = inst.edge(e);
        edge.cost + self.dist[edge.head] == self.dist[edge.tail]
    }

    /// Pointwise `self <= other`.
    pub fn dominates(&self, other: &DistanceMap) -> bool {
        self.dist.iter().zip(&other.dist).all(|(a, b)| a <= b)
    }
}

pub fn tree_distances(inst: &Instance, tree: &TreePolicy) -> DistanceMap {
    let mut dist: Vec<Option<i64>> = vec![None; inst.vertex_count()];
    dist[Instance::TARGET] = Some(0);
    let mut walk = Vec::new();
    for start in inst.non_target_vertices() {
        let mut v = start;
        while dist[v].is_none() {
            walk.push(v);
            v = inst.edge(tree.choice[v].expect("tree covers every vertex")).head;
        }
        let mut d = dist[v].unwrap();
        while let Some(u) = walk.pop() {
            d += inst.edge(tree.choice[u].unwrap()).cost;
            dist[u] = Some(d);
        }
    }
    DistanceMap {
        dist: dist.into_iter().map(Option::unwrap).collect(),
    }
}

pub fn improves(inst: &Instance, tree: &TreePolicy, e: EdgeId) -> bool {
    tree_distances(inst, tree).improves(inst, e)
}

/// Exchanges `e` with the edge the tree currently uses at `tail(e)`.
pub fn pivot(inst: &Instance, tree: &TreePolicy, e: EdgeId) -> Result<TreePolicy, GraphError> {
    if !improves(inst, tree, e) {
        return Err(GraphError::NotImproving(e));
    }
    Ok(pivot_unchecked(inst, tree, e))
}

/// Pivot without re-checking improvement. An improving pivot never closes a
/// cycle on an instance without negative cycles.
pub(crate) fn pivot_unchecked(inst: &Instance, tree: &TreePolicy, e: EdgeId) -> TreePolicy {
    let mut choice = tree.choice.clone();
    choice[inst.edge(e).tail] = Some(e);
    TreePolicy::from_choice_unchecked(inst, choice)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalTree {
    pub tree: TreePolicy,
    pub dist: DistanceMap,
}

/// Shortest-path tree of the subgraph `(V, facets)` by Bellman-Ford
/// relaxation. Among tight edges the smallest id whose head is already
/// attached wins, so the result is a function of the input even when the
/// optimum is not unique.
pub fn optimal_tree(inst: &Instance, facets: &EdgeSubset) -> Result<TreePolicy, GraphError> {
    solve_subset(inst, facets).map(|o| o.tree)
}

pub fn solve_subset(inst: &Instance, facets: &EdgeSubset) -> Result<OptimalTree, GraphError> {
    let nv = inst.vertex_count();
    let mut dist: Vec<Option<i64>> = vec![None; nv];
    dist[Instance::TARGET] = Some(0);
    for _ in 0..nv {
        let mut changed = false;
        for e in facets.iter().map(|id| inst.edge(id)) {
            if let Some(dh) = dist[e.head] {
                let cand = e.cost + dh;
                if dist[e.tail].is_none_or(|d| cand < d) {
                    dist[e.tail] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    if dist.iter().any(Option::is_none) {
        return Err(GraphError::NoTreeInSubset);
    }
    let dist = DistanceMap {
        dist: dist.into_iter().map(Option::unwrap).collect(),
    };

    let mut choice: Vec<Option<EdgeId>> = vec![None; nv];
    let mut attached = vec![false; nv];
    attached[Instance::TARGET] = true;
    let mut remaining = inst.n();
    while remaining > 0 {
        let before = remaining;
        for v in inst.non_target_vertices() {
            if attached[v] {
                continue;
            }
            let pick = inst
                .out_edges(v)
                .iter()
                .copied()
                .find(|&e| facets.contains(e) && attached[inst.edge(e).head] && dist.is_tight(inst, e));
            if let Some(e) = pick {
                choice[v] = Some(e);
                attached[v] = true;
                remaining -= 1;
            }
        }
        assert!(remaining < before, "tight edges always reach the target");
    }
    Ok(OptimalTree {
        tree: TreePolicy::from_choice_unchecked(inst, choice),
        dist,
    })
}

/// True iff `opt` is the only optimal tree within `facets`: no tight
/// alternative edge can be swapped in without closing a cycle.
pub fn optimum_is_unique(inst: &Instance, facets: &EdgeSubset, opt: &OptimalTree) -> bool {
    for v in inst.non_target_vertices() {
        for &e in inst.out_edges(v) {
            if !facets.contains(e) || opt.tree.contains(e) || !opt.dist.is_tight(inst, e) {
                continue;
            }
            let mut w = inst.edge(e).head;
            let mut through_v = false;
            while w != Instance::TARGET {
                if w == v {
                    through_v = true;
                    break;
                }
                w = inst.edge(opt.tree.choice[w].unwrap()).head;
            }
            if !through_v {
                return false;
            }
        }
    }
    true
}

/// Every tree policy contained in `facets`, by enumerating the product of
/// per-vertex choices.
pub fn trees_in(inst: &Instance, facets: &EdgeSubset) -> Vec<TreePolicy> {
    let options: Vec<Vec<EdgeId>> = inst
        .non_target_vertices()
        .map(|v| {
            inst.out_edges(v)
                .iter()
                .copied()
                .filter(|&e| facets.contains(e))
                .collect()
        })
        .collect();
    if options.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut trees = Vec::new();
    let mut idx = vec![0usize; options.len()];
    loop {
        let mut choice = vec![None; inst.vertex_count()];
        for (k, opts) in options.iter().enumerate() {
            choice[k + 1] = Some(opts[idx[k]]);
        }
        let tree = TreePolicy::from_choice_unchecked(inst, choice);
        if tree.first_cycle_vertex(inst).is_none() {
            trees.push(tree);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return trees;
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_vertex(c0: i64, c1: i64) -> Instance {
        Instance::validate(RawInstance::new("t").edge("v", "t", c0).edge("v", "t", c1)).unwrap()
    }

    #[test]
    fn negative_self_loop_is_rejected() {
        let raw = RawInstance::new("t").edge("v", "v", -1).edge("v", "t", 0);
        match Instance::validate(raw) {
            Err(GraphError::NegativeCycle(c)) => assert_eq!(c, vec!["v", "v"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_cycle_witness_is_a_cycle() {
        let raw = RawInstance::new("t")
            .edge("a", "b", 1)
            .edge("b", "c", -3)
            .edge("c", "a", 1)
            .edge("a", "t", 0);
        let Err(GraphError::NegativeCycle(c)) = Instance::validate(raw) else {
            panic!("expected negative cycle");
        };
        assert_eq!(c.first(), c.last());
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn zero_cycle_is_allowed() {
        let raw = RawInstance::new("t")
            .edge("a", "b", 0)
            .edge("b", "a", 0)
            .edge("a", "t", 2);
        assert!(Instance::validate(raw).is_ok());
    }

    #[test]
    fn structural_errors() {
        let dangling = RawInstance::new("t").edge("v", "w", 1);
        assert_eq!(
            Instance::validate(dangling),
            Err(GraphError::DanglingVertex("w".into()))
        );
        let target_out = RawInstance::new("t").edge("t", "v", 1).edge("v", "t", 1);
        assert_eq!(
            Instance::validate(target_out),
            Err(GraphError::TargetHasOutEdges("t".into()))
        );
        let stuck = RawInstance::new("t")
            .edge("a", "b", 1)
            .edge("b", "a", 1)
            .edge("c", "t", 1);
        assert_eq!(
            Instance::validate(stuck),
            Err(GraphError::Unreachable("a".into()))
        );
        let mut dup = RawInstance::new("t").edge("v", "t", 1).edge("v", "t", 2);
        dup.edges[1].id = 0;
        assert!(matches!(
            Instance::validate(dup),
            Err(GraphError::BadEdgeIds { .. })
        ));
    }

    #[test]
    fn distances_along_chains() {
        let inst = Instance::validate(RawInstance::new("t").edge("v", "t", 5)).unwrap();
        let tree = TreePolicy::from_edges(&inst, [EdgeId(0)]).unwrap();
        let d = tree_distances(&inst, &tree);
        assert_eq!(d.get(inst.vertex("v").unwrap()), 5);
        assert_eq!(d.get(inst.target()), 0);

        let inst = Instance::validate(RawInstance::new("t").edge("u", "v", 2).edge("v", "t", 3)).unwrap();
        let tree = TreePolicy::from_edges(&inst, [EdgeId(0), EdgeId(1)]).unwrap();
        let d = tree_distances(&inst, &tree);
        assert_eq!(d.get(inst.vertex("u").unwrap()), 5);
        assert_eq!(d.get(inst.vertex("v").unwrap()), 3);
    }

    #[test]
    fn improvement_is_strict() {
        let inst = one_vertex(0, 5);
        let b = TreePolicy::from_edges(&inst, [EdgeId(1)]).unwrap();
        assert!(improves(&inst, &b, EdgeId(0)));
        assert!(!improves(&inst, &b, EdgeId(1)));

        let tie = one_vertex(4, 4);
        let b = TreePolicy::from_edges(&tie, [EdgeId(1)]).unwrap();
        assert!(!improves(&tie, &b, EdgeId(0)));
        assert_eq!(
            pivot(&tie, &b, EdgeId(0)),
            Err(GraphError::NotImproving(EdgeId(0)))
        );
    }

    #[test]
    fn pivot_exchanges_one_edge() {
        let inst = one_vertex(0, 5);
        let b = TreePolicy::from_edges(&inst, [EdgeId(1)]).unwrap();
        let b2 = pivot(&inst, &b, EdgeId(0)).unwrap();
        assert_eq!(b2.edges().collect::<Vec<_>>(), vec![EdgeId(0)]);
    }

    #[test]
    fn tree_construction_rejects_cycles() {
        let inst = Instance::validate(
            RawInstance::new("t")
                .edge("a", "b", 0)
                .edge("b", "a", 0)
                .edge("a", "t", 2)
                .edge("b", "t", 2),
        )
        .unwrap();
        assert!(matches!(
            TreePolicy::from_edges(&inst, [EdgeId(0), EdgeId(1)]),
            Err(GraphError::NotATree(_))
        ));
        assert!(matches!(
            TreePolicy::from_edges(&inst, [EdgeId(0)]),
            Err(GraphError::NotATree(_))
        ));
        assert_eq!(trees_in(&inst, &inst.full_subset()).len(), 3);
    }

    #[test]
    fn optimal_tree_of_a_tree_is_itself() {
        let inst = one_vertex(3, 1);
        let b = TreePolicy::from_edges(&inst, [EdgeId(0)]).unwrap();
        assert_eq!(optimal_tree(&inst, b.as_subset()).unwrap(), b);
        assert_eq!(
            optimal_tree(&inst, &EdgeSubset::empty(2)),
            Err(GraphError::NoTreeInSubset)
        );
    }

    #[test]
    fn uniqueness_detects_ties_but_not_zero_cycles() {
        let tie = one_vertex(4, 4);
        let full = tie.full_subset();
        let opt = solve_subset(&tie, &full).unwrap();
        assert_eq!(opt.tree.choice(1), Some(EdgeId(0)));
        assert!(!optimum_is_unique(&tie, &full, &opt));

        // a -> b is tight but only closes the zero cycle through a
        let inst = Instance::validate(
            RawInstance::new("t")
                .edge("a", "b", 0)
                .edge("b", "a", 0)
                .edge("a", "t", 5)
                .edge("b", "t", 7),
        )
        .unwrap();
        let full = inst.full_subset();
        let opt = solve_subset(&inst, &full).unwrap();
        assert!(optimum_is_unique(&inst, &full, &opt));
        assert_eq!(trees_in(&inst, &full).len(), 3);
    }

    #[test]
    fn edge_refs_resolve_names_and_ids() {
        let inst = Instance::validate(
            RawInstance::new("t")
                .edge("x", "t", 0)
                .edge("x", "y", 3)
                .edge("y", "t", 0)
                .edge("y", "t", 2),
        )
        .unwrap();
        assert_eq!(inst.parse_edge_ref("x1"), Ok(EdgeId(1)));
        assert_eq!(inst.parse_edge_ref("y0"), Ok(EdgeId(2)));
        assert_eq!(inst.parse_edge_ref("3"), Ok(EdgeId(3)));
        assert!(inst.parse_edge_ref("y2").is_err());
        assert_eq!(inst.edge_name(EdgeId(3)), "y1");
        assert_eq!(inst.parse_edge_list("x0, y1"), Ok(vec![EdgeId(0), EdgeId(3)]));
    }
}
