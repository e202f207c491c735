//! Randomization schemes over column identities.
//!
//! Two schemes are built in: i.i.d. sampling, where draw `k` comes from the
//! stream `(seed, k)`, and groupwise sampling, where each of `rounds` passes
//! visits every group once in a uniformly shuffled order and draws one
//! identity per group. Both are pure functions of the master seed: the draw
//! for any position can be recomputed in isolation, so the resulting
//! [`SampleSet`] is independent of execution order and worker count.
//!
//! Draws within a groupwise round are statistically dependent (the round's
//! group order couples them); the [`DependencyGraph`] of a sample records
//! this, and [`forest_lambda`] evaluates the forest-complexity functional of
//! a supplied forest approximation, which drives the concentration bounds
//! for dependent samples.

use serde::{Deserialize, Serialize};

use crate::oracles::{ColumnId, Oracle, OracleError};
use crate::rng::Stream;

#[derive(Debug, thiserror::Error)]
pub enum SamplingError {
    #[error("oracle error: {0}")]
    Oracle(#[from] OracleError),
    #[error("groupwise sampling needs an oracle with group structure")]
    NoGroups,
    #[error("invalid forest approximation: {0}")]
    InvalidApproximation(String),
    #[error("sample must be nonempty")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Scheme {
    Iid,
    Groupwise { num_groups: usize, rounds: usize },
}

/// The multiset `J` of drawn column identities plus its provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleSet {
    pub identities: Vec<ColumnId>,
    #[serde(flatten)]
    pub scheme: Scheme,
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.identities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.identities.is_empty()
    }

    /// Number of draws beyond the first occurrence of each identity.
    pub fn duplicate_count(&self) -> usize {
        let distinct: std::collections::BTreeSet<&ColumnId> = self.identities.iter().collect();
        self.identities.len() - distinct.len()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sample serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// `k` independent draws from the oracle's scheme; draw `k` uses the stream
/// `(seed, k)`.
pub fn sample_iid(oracle: &Oracle, k: usize, seed: u64) -> SampleSet {
    let root = Stream::new(seed);
    let identities = (0..k)
        .map(|i| oracle.draw(&mut root.derive(i as u64)))
        .collect();
    SampleSet {
        identities,
        scheme: Scheme::Iid,
        seed,
    }
}

/// Groupwise sampling: `rounds` passes, each visiting every group exactly
/// once in a uniformly random order and drawing one identity from the
/// group's distribution. The order for round `r` comes from the stream
/// `(seed, r, "order")` and the draw for group `g` from `(seed, r, g)`, so
/// the sample is scheduling-independent. Yields exactly `rounds` identities
/// per group.
pub fn sample_groupwise(
    oracle: &Oracle,
    rounds: usize,
    seed: u64,
) -> Result<SampleSet, SamplingError> {
    let num_groups = oracle.num_groups().ok_or(SamplingError::NoGroups)?;
    if rounds == 0 || num_groups == 0 {
        return Err(SamplingError::Empty);
    }
    let root = Stream::new(seed);
    let mut identities = Vec::with_capacity(rounds * num_groups);
    for r in 0..rounds {
        let round = root.derive(r as u64);
        let mut order: Vec<usize> = (0..num_groups).collect();
        round.derive_named("order").shuffle(&mut order);
        for &g in &order {
            let mut draw = round.derive(g as u64);
            identities.push(oracle.draw_from_group(g, &mut draw)?);
        }
    }
    Ok(SampleSet {
        identities,
        scheme: Scheme::Groupwise { num_groups, rounds },
        seed,
    })
}

/// Undirected graph on the draw positions of a sample; non-adjacent sets of
/// positions are statistically independent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub vertices: usize,
    /// Normalized edge list: `u < v`, sorted, no duplicates.
    pub edges: Vec<(usize, usize)>,
}

impl DependencyGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Dependency structure of a sample: i.i.d. draws are edgeless; a groupwise
/// sample couples the draws of each round into a clique.
pub fn dependency_graph_of(set: &SampleSet) -> DependencyGraph {
    match set.scheme {
        Scheme::Iid => DependencyGraph {
            vertices: set.len(),
            edges: Vec::new(),
        },
        Scheme::Groupwise { num_groups, rounds } => {
            let mut edges = Vec::with_capacity(rounds * num_groups * (num_groups - 1) / 2);
            for r in 0..rounds {
                let base = r * num_groups;
                for u in 0..num_groups {
                    for v in u + 1..num_groups {
                        edges.push((base + u, base + v));
                    }
                }
            }
            DependencyGraph {
                vertices: rounds * num_groups,
                edges,
            }
        }
    }
}

/// A forest `F` plus a vertex mapping `phi` from graph vertices onto forest
/// vertices such that every graph edge either collapses (`phi(u) = phi(v)`)
/// or lands on a forest edge.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForestApproximation {
    /// `vertex_map[v]` is the forest vertex graph vertex `v` merges into.
    pub vertex_map: Vec<usize>,
    pub forest_vertices: usize,
    pub forest_edges: Vec<(usize, usize)>,
}

impl ForestApproximation {
    /// Identity mapping onto an edgeless forest; valid for edgeless graphs.
    pub fn edgeless(vertices: usize) -> Self {
        ForestApproximation {
            vertex_map: (0..vertices).collect(),
            forest_vertices: vertices,
            forest_edges: Vec::new(),
        }
    }

    /// Collapses each round-clique of a groupwise dependency graph to one
    /// isolated forest vertex.
    pub fn collapse_cliques(num_groups: usize, rounds: usize) -> Self {
        ForestApproximation {
            vertex_map: (0..rounds * num_groups).map(|v| v / num_groups).collect(),
            forest_vertices: rounds,
            forest_edges: Vec::new(),
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// Evaluates the forest-complexity functional of `(phi, F)` on `graph`:
/// the sum over forest edges of `(|phi^-1(u)| + |phi^-1(v)|)^2` plus, for
/// each tree of the forest, the squared size of its smallest preimage class.
///
/// The approximation is validated first: `F` must be a simple forest whose
/// vertices all receive at least one graph vertex, and every graph edge must
/// collapse or land on a forest edge.
pub fn forest_lambda(
    graph: &DependencyGraph,
    approx: &ForestApproximation,
) -> Result<f64, SamplingError> {
    let invalid = |msg: &str| Err(SamplingError::InvalidApproximation(msg.into()));
    if approx.vertex_map.len() != graph.vertices {
        return invalid("vertex map length differs from graph order");
    }
    if approx.vertex_map.iter().any(|&f| f >= approx.forest_vertices) {
        return invalid("vertex map points outside the forest");
    }
    let mut preimage = vec![0usize; approx.forest_vertices];
    for &f in &approx.vertex_map {
        preimage[f] += 1;
    }
    if preimage.iter().any(|&c| c == 0) {
        return invalid("forest vertex with empty preimage");
    }
    let mut uf = UnionFind::new(approx.forest_vertices);
    let mut edge_set = std::collections::BTreeSet::new();
    for &(u, v) in &approx.forest_edges {
        if u == v || u >= approx.forest_vertices || v >= approx.forest_vertices {
            return invalid("forest edge out of range or a self-loop");
        }
        if !edge_set.insert((u.min(v), u.max(v))) {
            return invalid("duplicate forest edge");
        }
        if !uf.union(u, v) {
            return invalid("forest contains a cycle");
        }
    }
    for &(u, v) in &graph.edges {
        let (fu, fv) = (approx.vertex_map[u], approx.vertex_map[v]);
        if fu != fv && !edge_set.contains(&(fu.min(fv), fu.max(fv))) {
            return invalid("graph edge neither collapses nor lands on a forest edge");
        }
    }
    let mut lambda = 0.0;
    for &(u, v) in &approx.forest_edges {
        let s = (preimage[u] + preimage[v]) as f64;
        lambda += s * s;
    }
    // Smallest preimage class per tree, isolated vertices included.
    let mut tree_min: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for v in 0..approx.forest_vertices {
        let root = uf.find(v);
        let entry = tree_min.entry(root).or_insert(usize::MAX);
        *entry = (*entry).min(preimage[v]);
    }
    for &min_size in tree_min.values() {
        lambda += (min_size * min_size) as f64;
    }
    Ok(lambda)
}
