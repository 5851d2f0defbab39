//! Complete graphs, `t`-subdivided prisms over complete graphs, and boundary
//! edge sets.
//!
//! Prism vertices use the canonical labelling `id(i, j) = (j - 1) * base_n + i`
//! for base vertex `i` in `0..base_n` and layer `j` in `1..=t`, so layer 1 is
//! the bottom clique and layer `t` the top clique.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Undirected edge stored with the smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[VertexId; 2]", into = "[VertexId; 2]")]
pub struct Edge(VertexId, VertexId);

impl Edge {
    pub fn new(u: VertexId, v: VertexId) -> Result<Self> {
        if u == v {
            return Err(Error::invalid(format!("self-loop at vertex {u}")));
        }
        Ok(Edge(u.min(v), u.max(v)))
    }

    pub fn u(self) -> VertexId {
        self.0
    }

    pub fn v(self) -> VertexId {
        self.1
    }

    pub fn has_endpoint(self, x: VertexId) -> bool {
        self.0 == x || self.1 == x
    }

    /// The endpoint opposite `x`, if `x` is an endpoint.
    pub fn other(self, x: VertexId) -> Option<VertexId> {
        if self.0 == x {
            Some(self.1)
        } else if self.1 == x {
            Some(self.0)
        } else {
            None
        }
    }

    /// True iff exactly one endpoint lies in the set described by `mask`.
    pub fn crosses(self, mask: &[bool]) -> bool {
        mask[self.0] != mask[self.1]
    }
}

impl TryFrom<[VertexId; 2]> for Edge {
    type Error = Error;

    fn try_from(pair: [VertexId; 2]) -> Result<Self> {
        Edge::new(pair[0], pair[1])
    }
}

impl From<Edge> for [VertexId; 2] {
    fn from(e: Edge) -> Self {
        [e.0, e.1]
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// Membership mask of `set` over `0..vertex_count`.
pub fn membership(vertex_count: usize, set: &[VertexId]) -> Result<Vec<bool>> {
    let mut mask = vec![false; vertex_count];
    for &v in set {
        if v >= vertex_count {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                vertex_count,
            });
        }
        mask[v] = true;
    }
    Ok(mask)
}

/// Number of edges of `edges` with exactly one endpoint in `mask`.
pub fn crossing_count<'a>(edges: impl IntoIterator<Item = &'a Edge>, mask: &[bool]) -> usize {
    edges.into_iter().filter(|e| e.crosses(mask)).count()
}

/// Immutable simple graph with a sorted edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<VertexId>>,
}

impl Graph {
    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        let mut adjacency = vec![Vec::new(); vertex_count];
        for e in &edges {
            if e.v() >= vertex_count {
                return Err(Error::VertexOutOfRange {
                    vertex: e.v(),
                    vertex_count,
                });
            }
            adjacency[e.u()].push(e.v());
            adjacency[e.v()].push(e.u());
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            vertex_count,
            edges,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical (lexicographic) order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Position of `e` in the canonical edge order.
    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edge_index(e).is_some()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    /// Edges with exactly one endpoint in `set`, in canonical order.
    pub fn delta(&self, set: &[VertexId]) -> Result<Vec<Edge>> {
        let mask = membership(self.vertex_count, set)?;
        Ok(self
            .edges
            .iter()
            .copied()
            .filter(|e| e.crosses(&mask))
            .collect())
    }
}

/// The complete graph `K_n` on vertices `0..n`.
pub fn build_complete(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::invalid("complete graph needs at least one vertex"));
    }
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| Edge(u, v)));
    Graph::from_edges(n, edges)
}

/// Index of edge `(u, v)` of `K_n` in the lexicographic edge order.
pub fn complete_edge_index(n: usize, e: Edge) -> usize {
    let (u, v) = (e.u(), e.v());
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

pub fn binomial2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `t`-subdivided prism over `K_base_n`: a bottom and a top clique joined by
/// vertical paths with `t - 2` interior vertices each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrismGraph {
    base_n: usize,
    t: usize,
    graph: Graph,
}

impl PrismGraph {
    /// Builds the prism for any `base_n >= 1`. [`build_prism`] applies the
    /// stricter `base_n >= 3` guard; the degenerate bases are used by the
    /// matching / 2-matching correspondence over small graphs.
    pub fn new(base_n: usize, t: usize) -> Result<Self> {
        if base_n == 0 {
            return Err(Error::invalid("prism base needs at least one vertex"));
        }
        if t < 2 {
            return Err(Error::invalid(format!(
                "prism needs t >= 2 layers, got {t}"
            )));
        }
        let id = |i: usize, j: usize| (j - 1) * base_n + i;
        let mut edges = Vec::with_capacity(2 * binomial2(base_n) + (t - 1) * base_n);
        for layer in [1, t] {
            for a in 0..base_n {
                for b in a + 1..base_n {
                    edges.push(Edge(id(a, layer), id(b, layer)));
                }
            }
        }
        for i in 0..base_n {
            for j in 1..t {
                edges.push(Edge(id(i, j), id(i, j + 1)));
            }
        }
        let graph = Graph::from_edges(t * base_n, edges)?;
        Ok(PrismGraph { base_n, t, graph })
    }

    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Copy of base vertex `i` in layer `layer` (1-based).
    pub fn vertex(&self, i: VertexId, layer: usize) -> VertexId {
        debug_assert!(i < self.base_n && (1..=self.t).contains(&layer));
        (layer - 1) * self.base_n + i
    }

    pub fn base_index(&self, v: VertexId) -> VertexId {
        v % self.base_n
    }

    pub fn layer(&self, v: VertexId) -> usize {
        v / self.base_n + 1
    }

    /// The vertical path `i^1, i^2, ..., i^t`.
    pub fn column(&self, i: VertexId) -> Vec<VertexId> {
        (1..=self.t).map(|j| self.vertex(i, j)).collect()
    }

    /// Edges of the vertical path over base vertex `i`, bottom to top.
    pub fn vertical_path(&self, i: VertexId) -> Vec<Edge> {
        (1..self.t)
            .map(|j| Edge(self.vertex(i, j), self.vertex(i, j + 1)))
            .collect()
    }

    /// Copy of base edge `e` in layer `layer` (only layers 1 and `t` carry clique edges).
    pub fn lift(&self, e: Edge, layer: usize) -> Edge {
        Edge(self.vertex(e.u(), layer), self.vertex(e.v(), layer))
    }

    pub fn is_vertical(&self, e: Edge) -> bool {
        self.base_index(e.u()) == self.base_index(e.v())
    }

    pub fn is_bottom(&self, e: Edge) -> bool {
        self.layer(e.u()) == 1 && self.layer(e.v()) == 1
    }

    pub fn is_top(&self, e: Edge) -> bool {
        self.layer(e.u()) == self.t && self.layer(e.v()) == self.t
    }

    /// Projection of a bottom or top edge onto the base graph.
    pub fn project(&self, e: Edge) -> Option<Edge> {
        if self.is_vertical(e) {
            return None;
        }
        Edge::new(self.base_index(e.u()), self.base_index(e.v())).ok()
    }

    pub fn dump(&self) -> PrismDump {
        PrismDump {
            base_n: self.base_n,
            t: self.t,
            edges: self.graph.edges().to_vec(),
        }
    }
}

/// `t`-subdivided prism over `K_base_n` with `base_n >= 3`, `t >= 2`.
pub fn build_prism(base_n: usize, t: usize) -> Result<PrismGraph> {
    if base_n < 3 {
        return Err(Error::invalid(format!(
            "prism base must have at least 3 vertices, got {base_n}"
        )));
    }
    PrismGraph::new(base_n, t)
}

/// JSON dump of a prism: `{"base_n", "t", "edges": [[u, v], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrismDump {
    pub base_n: usize,
    pub t: usize,
    pub edges: Vec<Edge>,
}
