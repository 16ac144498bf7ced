//! Instance construction and inspection: the cube view of two-choice
//! instances, exhaustive genericity checking, seeded random instances, the
//! counterexample search, and file I/O.

pub mod errata;
pub mod io;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::ExactError;
use crate::graph::{
    tree_distances, trees_in, EdgeId, EdgeSubset, GraphError, Instance, RawInstance, TreePolicy,
};

pub use errata::{derive_errata_instance, errata_fixture, ERRATA_FIXTURE};
pub use io::{load_instance, parse_instance, read_instance, save_instance, serialize_instance};

/// Largest instance accepted by [`genericity_check`].
pub const MAX_GENERICITY_EDGES: usize = 20;
pub const RANDOM_INSTANCE_RETRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error(transparent)]
    Invalid(#[from] GraphError),
    #[error("not cube shaped: {0}")]
    NotCubeShaped(String),
    #[error("trees {a} and {b} tie, the cube edge has no orientation")]
    OrientationTie { a: String, b: String },
    #[error("{edges} edges exceed the exhaustive-check bound {bound}")]
    TooLargeForExhaustiveCheck { edges: usize, bound: usize },
    #[error("no valid generic instance after {0} attempts")]
    GenerationFailedAfterRetries(usize),
    #[error("search space exhausted after {0} candidates")]
    SearchExhausted(usize),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// True iff every edge subset that contains a tree has exactly one optimal
/// tree. Brute force over all per-vertex nonempty subsets of out-edges and
/// all trees inside each.
pub fn genericity_check(inst: &Instance) -> Result<bool, InstanceError> {
    if inst.m() > MAX_GENERICITY_EDGES {
        return Err(InstanceError::TooLargeForExhaustiveCheck {
            edges: inst.m(),
            bound: MAX_GENERICITY_EDGES,
        });
    }
    let outs: Vec<&[EdgeId]> = inst.non_target_vertices().map(|v| inst.out_edges(v)).collect();
    let mut masks: Vec<u32> = vec![1; outs.len()];
    loop {
        let facets = EdgeSubset::from_ids(
            inst.m(),
            outs.iter()
                .zip(&masks)
                .flat_map(|(o, &mask)| o.iter().enumerate().filter(move |(k, _)| mask & (1 << k) != 0))
                .map(|(_, &e)| e),
        );
        if count_optimal_trees(inst, &facets) > 1 {
            return Ok(false);
        }
        let mut k = 0;
        loop {
            if k == masks.len() {
                return Ok(true);
            }
            masks[k] += 1;
            if masks[k] < 1 << outs[k].len() {
                break;
            }
            masks[k] = 1;
            k += 1;
        }
    }
}

/// Number of trees in `facets` whose distances equal the pointwise minimum
/// over all trees in `facets`.
pub fn count_optimal_trees(inst: &Instance, facets: &EdgeSubset) -> usize {
    let dists: Vec<Vec<i64>> = trees_in(inst, facets)
        .iter()
        .map(|t| tree_distances(inst, t).as_slice().to_vec())
        .collect();
    let Some(first) = dists.first() else {
        return 0;
    };
    let best: Vec<i64> = (0..first.len())
        .map(|v| dists.iter().map(|d| d[v]).min().unwrap())
        .collect();
    dists.iter().filter(|d| **d == best).count()
}

/// Bijection between the trees of a two-choice instance and bit strings.
/// Character `j` of a string selects the lower-id (`0`) or higher-id (`1`)
/// out-edge of the `j`-th non-target vertex, so `001` over axes `x, y, z` is
/// `{x0, y0, z1}`. As an integer, axis `j` is bit `n - 1 - j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeEncoding {
    axes: Vec<[EdgeId; 2]>,
}

impl CubeEncoding {
    pub const MAX_DIMENSION: usize = 20;

    pub fn new(inst: &Instance) -> Result<Self, InstanceError> {
        let mut axes = Vec::new();
        for v in inst.non_target_vertices() {
            match inst.out_edges(v) {
                &[a, b] => axes.push([a, b]),
                other => {
                    return Err(InstanceError::NotCubeShaped(format!(
                        "`{}` has {} outgoing edges",
                        inst.vertex_name(v),
                        other.len()
                    )))
                }
            }
        }
        if axes.len() > Self::MAX_DIMENSION {
            return Err(InstanceError::NotCubeShaped(format!(
                "dimension {} too large",
                axes.len()
            )));
        }
        let enc = CubeEncoding { axes };
        for idx in 0..enc.vertex_count() {
            if TreePolicy::from_edges(inst, enc.edges_of(idx)).is_err() {
                return Err(InstanceError::NotCubeShaped(format!(
                    "{} is not a tree",
                    enc.format(idx)
                )));
            }
        }
        Ok(enc)
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn vertex_count(&self) -> usize {
        1 << self.axes.len()
    }

    pub fn axis_edges(&self, axis: usize) -> [EdgeId; 2] {
        self.axes[axis]
    }

    fn bit(&self, idx: usize, axis: usize) -> usize {
        (idx >> (self.axes.len() - 1 - axis)) & 1
    }

    pub fn axis_mask(&self, axis: usize) -> usize {
        1 << (self.axes.len() - 1 - axis)
    }

    fn edges_of(&self, idx: usize) -> Vec<EdgeId> {
        (0..self.axes.len())
            .map(|j| self.axes[j][self.bit(idx, j)])
            .collect()
    }

    pub fn tree(&self, inst: &Instance, idx: usize) -> TreePolicy {
        TreePolicy::from_edges(inst, self.edges_of(idx)).expect("every cube vertex is a tree")
    }

    pub fn format(&self, idx: usize) -> String {
        (0..self.axes.len())
            .map(|j| if self.bit(idx, j) == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn parse(&self, bits: &str) -> Option<usize> {
        if bits.len() != self.axes.len() || !bits.chars().all(|c| c == '0' || c == '1') {
            return None;
        }
        if bits.is_empty() {
            return Some(0);
        }
        usize::from_str_radix(bits, 2).ok()
    }

    pub fn decode(&self, inst: &Instance, bits: &str) -> Option<TreePolicy> {
        self.parse(bits).map(|idx| self.tree(inst, idx))
    }

    pub fn index_of(&self, tree: &TreePolicy) -> Option<usize> {
        let mut idx = 0;
        for (j, pair) in self.axes.iter().enumerate() {
            if tree.contains(pair[1]) {
                idx |= self.axis_mask(j);
            } else if !tree.contains(pair[0]) {
                return None;
            }
        }
        Some(idx)
    }

    pub fn encode(&self, tree: &TreePolicy) -> Option<String> {
        self.index_of(tree).map(|i| self.format(i))
    }

    /// Facet set of the face that fixes the axes outside `free` to the bits
    /// of `anchor`.
    pub fn face_facets(&self, m: usize, free: usize, anchor: usize) -> EdgeSubset {
        let mut facets = EdgeSubset::empty(m);
        for j in 0..self.axes.len() {
            if free & self.axis_mask(j) != 0 {
                facets.insert(self.axes[j][0]);
                facets.insert(self.axes[j][1]);
            } else {
                facets.insert(self.axes[j][self.bit(anchor, j)]);
            }
        }
        facets
    }
}

/// Improving directions of every cube edge. `improving[v]` has bit
/// `axis_mask(j)` set when flipping axis `j` at cube vertex `v` is an
/// improving pivot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationView {
    pub encoding: CubeEncoding,
    improving: Vec<usize>,
}

pub fn orientation_view(inst: &Instance) -> Result<OrientationView, InstanceError> {
    let encoding = CubeEncoding::new(inst)?;
    let n = encoding.dimension();
    let mut improving = vec![0usize; encoding.vertex_count()];
    for (idx, out) in improving.iter_mut().enumerate() {
        let tree = encoding.tree(inst, idx);
        let dist = tree_distances(inst, &tree);
        for j in 0..n {
            let other = encoding.axes[j][1 - encoding.bit(idx, j)];
            if dist.improves(inst, other) {
                *out |= encoding.axis_mask(j);
            }
        }
    }
    for idx in 0..encoding.vertex_count() {
        for j in 0..n {
            let mask = encoding.axis_mask(j);
            let nb = idx ^ mask;
            if improving[idx] & mask == 0 && improving[nb] & mask == 0 {
                return Err(InstanceError::OrientationTie {
                    a: encoding.format(idx),
                    b: encoding.format(nb),
                });
            }
        }
    }
    Ok(OrientationView { encoding, improving })
}

impl OrientationView {
    pub fn improving_axes(&self, idx: usize) -> usize {
        self.improving[idx]
    }

    /// Cube vertices reachable by one improving pivot from `idx`.
    pub fn successors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.encoding.dimension();
        (0..n)
            .map(move |j| self.encoding.axis_mask(j))
            .filter(move |&m| self.improving[idx] & m != 0)
            .map(move |m| idx ^ m)
    }

    pub fn is_acyclic(&self) -> bool {
        let count = self.improving.len();
        let mut indegree = vec![0usize; count];
        for v in 0..count {
            for w in self.successors(v) {
                indegree[w] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..count).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for w in self.successors(v) {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push(w);
                }
            }
        }
        seen == count
    }

    /// Vertices of the face `(free, anchor)` with no improving free axis.
    pub fn sinks_of_face(&self, free: usize, anchor: usize) -> Vec<usize> {
        let fixed = !free & (self.improving.len() - 1);
        (0..self.improving.len())
            .filter(|&v| v & fixed == anchor & fixed)
            .filter(|&v| self.improving[v] & free == 0)
            .collect()
    }

    /// Every face, including the full cube and single vertices, has exactly
    /// one sink.
    pub fn every_face_has_unique_sink(&self) -> bool {
        let count = self.improving.len();
        (0..count).all(|free| {
            (0..count)
                .filter(|&a| a & free == 0)
                .all(|anchor| self.sinks_of_face(free, anchor).len() == 1)
        })
    }

    pub fn sink(&self) -> Option<usize> {
        match self.sinks_of_face(self.improving.len() - 1, 0).as_slice() {
            &[s] => Some(s),
            _ => None,
        }
    }

    /// All directed paths of improving pivots from `from` to `to`.
    pub fn paths(&self, from: usize, to: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = vec![from];
        self.extend_paths(to, &mut path, &mut out);
        out
    }

    fn extend_paths(&self, to: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == to {
            out.push(path.clone());
            return;
        }
        if path.len() > self.improving.len() {
            return;
        }
        for w in self.successors(v).collect::<Vec<_>>() {
            path.push(w);
            self.extend_paths(to, path, out);
            path.pop();
        }
    }
}

/// Seeded random instance with vertices `v1..vn` and target `t`. The first
/// out-edge of `vi` points at `t` or a lower-numbered vertex so the target is
/// reachable; the rest point anywhere but `vi`. Costs are uniform in
/// `-cost_bound..=cost_bound`. Candidates are rejected until one validates
/// and, for at most [`MAX_GENERICITY_EDGES`] edges, is generic.
pub fn random_instance(
    n: usize,
    out_degree: usize,
    cost_bound: i64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    assert!(
        n >= 1 && out_degree >= 1,
        "need at least one vertex and one edge each"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = |i: usize| if i == 0 { "t".to_owned() } else { format!("v{i}") };
    for _ in 0..RANDOM_INSTANCE_RETRIES {
        let mut raw = RawInstance::new("t");
        for i in 1..=n {
            for k in 0..out_degree {
                let heads: Vec<usize> = if k == 0 {
                    (0..i).collect()
                } else {
                    (0..=n).filter(|&h| h != i).collect()
                };
                let head = *heads.choose(&mut rng).unwrap();
                let cost = rng.gen_range(-cost_bound..=cost_bound);
                raw = raw.edge(name(i), name(head), cost);
            }
        }
        let Ok(inst) = Instance::validate(raw) else {
            continue;
        };
        if inst.m() <= MAX_GENERICITY_EDGES && !genericity_check(&inst)? {
            continue;
        }
        return Ok(inst);
    }
    Err(InstanceError::GenerationFailedAfterRetries(
        RANDOM_INSTANCE_RETRIES,
    ))
}

/// A uniformly random tree policy of `inst`, by rejection over per-vertex
/// choices.
pub fn random_tree<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> TreePolicy {
    loop {
        let picks: Vec<EdgeId> = inst
            .non_target_vertices()
            .map(|v| *inst.out_edges(v).choose(rng).unwrap())
            .collect();
        if let Ok(t) = TreePolicy::from_edges(inst, picks) {
            return t;
        }
    }
}
