//! Simple undirected graphs with dense vertex ids, plus cheap edge overlays.

use std::collections::BTreeSet;
use std::iter::{Chain, Copied};
use std::slice;

use crate::error::GraphError;

pub type Vertex = usize;

/// Neighbour iterator shared by [`Graph`] and [`GraphOverlay`]: base slice then extra slice.
pub type Neighbours<'a> = Chain<Copied<slice::Iter<'a, Vertex>>, Copied<slice::Iter<'a, Vertex>>>;

/// Read access to an undirected simple graph.
pub trait Adjacency {
    fn vertex_count(&self) -> usize;
    fn neighbours(&self, v: Vertex) -> Neighbours<'_>;
    fn degree(&self, v: Vertex) -> usize;
    fn adjacent(&self, u: Vertex, v: Vertex) -> bool;

    fn max_degree(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.vertex_count()
    }
}

/// Immutable simple graph. Adjacency lists are sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    /// Builds a graph from an edge list. Duplicate edges (in either orientation) are merged;
    /// the number of merged duplicates is returned alongside.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<(Self, usize), GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut duplicates = 0;
        for list in &mut adj {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            duplicates += before - list.len();
        }
        // each duplicate edge was counted once at each endpoint
        Ok((Graph { adj }, duplicates / 2))
    }

    /// Like [`Graph::from_edges`] but for callers that know the input is clean.
    pub fn from_edge_list(n: usize, edges: &[(Vertex, Vertex)]) -> Self {
        Self::from_edges(n, edges.iter().copied())
            .expect("edge list must be simple and in range")
            .0
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::from_edge_list(n, &edges)
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edge_list(n, &edges)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edge_list(n, &edges)
    }

    /// Star with centre `0` and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Self::from_edge_list(leaves + 1, &edges)
    }

    pub fn neighbour_slice(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// All edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| u < v).map(move |v| (u, v)))
    }

    /// Checks simplicity and symmetry over every adjacency entry.
    pub fn audit(&self) -> Result<(), GraphError> {
        audit_adjacency(self)
    }
}

impl Adjacency for Graph {
    fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    fn neighbours(&self, v: Vertex) -> Neighbours<'_> {
        self.adj[v].iter().copied().chain([].iter().copied())
    }

    fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }
}

/// A base graph plus extra edges. The base is borrowed, never copied.
#[derive(Clone, Debug)]
pub struct GraphOverlay<'g> {
    base: &'g Graph,
    extra: Vec<Vec<Vertex>>,
    extra_count: usize,
}

impl<'g> GraphOverlay<'g> {
    pub fn new(base: &'g Graph) -> Self {
        GraphOverlay {
            base,
            extra: vec![Vec::new(); base.vertex_count()],
            extra_count: 0,
        }
    }

    pub fn base(&self) -> &'g Graph {
        self.base
    }

    /// Adds `uv` unless it is already present. Returns whether the edge is new.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<bool, GraphError> {
        let n = self.base.vertex_count();
        if u >= n || v >= n {
            return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n });
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if self.adjacent(u, v) {
            return Ok(false);
        }
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.extra[a];
            let pos = list.binary_search(&b).unwrap_err();
            list.insert(pos, b);
        }
        self.extra_count += 1;
        Ok(true)
    }

    pub fn extra_edge_count(&self) -> usize {
        self.extra_count
    }

    pub fn extra_degree(&self, v: Vertex) -> usize {
        self.extra[v].len()
    }

    /// Extra edges `(u, v)` with `u < v`, sorted.
    pub fn extra_edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.extra
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| u < v).map(move |v| (u, v)))
    }

    pub fn audit(&self) -> Result<(), GraphError> {
        for (u, v) in self.extra_edges() {
            if self.base.adjacent(u, v) {
                return Err(GraphError::Asymmetric(u, v));
            }
        }
        audit_adjacency(self)
    }
}

impl Adjacency for GraphOverlay<'_> {
    fn vertex_count(&self) -> usize {
        self.base.vertex_count()
    }

    fn neighbours(&self, v: Vertex) -> Neighbours<'_> {
        self.base.adj[v].iter().copied().chain(self.extra[v].iter().copied())
    }

    fn degree(&self, v: Vertex) -> usize {
        self.base.degree(v) + self.extra[v].len()
    }

    fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.base.adjacent(u, v) || self.extra[u].binary_search(&v).is_ok()
    }
}

fn audit_adjacency<G: Adjacency + ?Sized>(g: &G) -> Result<(), GraphError> {
    let n = g.vertex_count();
    for v in 0..n {
        let mut seen = BTreeSet::new();
        for u in g.neighbours(v) {
            if u >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(v));
            }
            if !seen.insert(u) {
                return Err(GraphError::DuplicateEdge(v, u));
            }
            if !g.neighbours(u).any(|w| w == v) {
                return Err(GraphError::Asymmetric(v, u));
            }
        }
        if seen.len() != g.degree(v) {
            return Err(GraphError::DegreeMismatch(v));
        }
    }
    Ok(())
}

/// `{w : w adjacent to both u and v}` in ascending order.
pub fn common_neighbours<G: Adjacency + ?Sized>(
    g: &G,
    u: Vertex,
    v: Vertex,
) -> Result<Vec<Vertex>, GraphError> {
    let n = g.vertex_count();
    for x in [u, v] {
        if x >= n {
            return Err(GraphError::VertexOutOfRange { vertex: x, n });
        }
    }
    if u == v {
        return Err(GraphError::SameVertex(u));
    }
    let mut out: Vec<Vertex> = g.neighbours(u).filter(|&w| g.adjacent(w, v)).collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_edges_are_merged_and_counted() {
        let (g, dups) = Graph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(dups, 1);
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(Graph::from_edges(2, [(1, 1)]).unwrap_err(), GraphError::SelfLoop(1));
    }

    #[test]
    fn common_neighbour_examples() {
        let k3 = Graph::complete(3);
        assert_eq!(common_neighbours(&k3, 0, 1).unwrap(), vec![2]);
        assert_eq!(common_neighbours(&k3, 2, 0).unwrap(), vec![1]);
        let p3 = Graph::path(3);
        assert_eq!(common_neighbours(&p3, 0, 2).unwrap(), vec![1]);
        let e = Graph::empty(4);
        assert!(common_neighbours(&e, 0, 3).unwrap().is_empty());
        assert!(matches!(
            common_neighbours(&e, 0, 9),
            Err(GraphError::VertexOutOfRange { .. })
        ));
        assert_eq!(common_neighbours(&e, 1, 1), Err(GraphError::SameVertex(1)));
    }

    #[test]
    fn overlay_adds_only_new_edges() {
        let g = Graph::path(4);
        let mut o = GraphOverlay::new(&g);
        assert!(!o.add_edge(0, 1).unwrap());
        assert!(o.add_edge(0, 3).unwrap());
        assert!(!o.add_edge(3, 0).unwrap());
        assert_eq!(o.extra_edge_count(), 1);
        assert_eq!(o.degree(0), 2);
        assert!(o.adjacent(3, 0));
        assert_eq!(common_neighbours(&o, 1, 3).unwrap(), vec![0, 2]);
        o.audit().unwrap();
        assert_eq!(g.degree(0), 1);
    }
}
