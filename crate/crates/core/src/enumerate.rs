//! Exhaustive enumeration of small graphs up to isomorphism, used by oracle tests.

use std::collections::BTreeSet;

use crate::graph::{Adjacency, Graph, Vertex};

/// Index of the unordered pair `{u, v}` (u < v) in the upper-triangle bit layout.
fn pair_index(u: usize, v: usize) -> usize {
    debug_assert!(u < v);
    v * (v - 1) / 2 + u
}

fn to_mask(g: &Graph) -> u64 {
    g.edges().fold(0u64, |m, (u, v)| m | 1 << pair_index(u, v))
}

fn from_mask(n: usize, mask: u64) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        for u in 0..v {
            if mask >> pair_index(u, v) & 1 == 1 {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edge_list(n, &edges)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn canonical_mask(edges: &[(usize, usize)], perms: &[Vec<usize>]) -> u64 {
    perms
        .iter()
        .map(|p| {
            edges.iter().fold(0u64, |m, &(u, v)| {
                let (a, b) = (p[u].min(p[v]), p[u].max(p[v]));
                m | 1 << pair_index(a, b)
            })
        })
        .min()
        .unwrap_or(0)
}

/// One representative per isomorphism class of graphs on exactly `n` vertices (n ≤ 8).
/// Built by vertex augmentation from the classes on `n - 1` vertices.
pub fn graphs_up_to_isomorphism(n: usize) -> Vec<Graph> {
    assert!(n <= 8, "brute-force canonical forms only scale to tiny graphs");
    if n == 0 {
        return vec![Graph::empty(0)];
    }
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    for smaller in graphs_up_to_isomorphism(n - 1) {
        let base = to_mask(&smaller);
        for subset in 0u64..1 << (n - 1) {
            let mut mask = base;
            for u in 0..n - 1 {
                if subset >> u & 1 == 1 {
                    mask |= 1 << pair_index(u, n - 1);
                }
            }
            let edges: Vec<_> = from_mask(n, mask).edges().collect();
            seen.insert(canonical_mask(&edges, &perms));
        }
    }
    seen.into_iter().map(|m| from_mask(n, m)).collect()
}

pub fn is_connected<G: Adjacency>(g: &G) -> bool {
    let n = g.vertex_count();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for u in g.neighbours(v) {
            if !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == n
}

/// Canonical code of a connected graph: the lexicographically smallest adjacency code over
/// all breadth-first labelings (every root, every ordering of each vertex's new children).
/// The set of BFS labelings is isomorphism-invariant, so equal codes ⇔ isomorphic graphs.
pub fn canonical_code_connected(g: &Graph) -> Vec<bool> {
    let n = g.vertex_count();
    assert!(is_connected(g), "canonical_code_connected needs a connected graph");
    let mut best: Option<Vec<bool>> = None;
    for root in 0..n {
        let mut order = vec![root];
        let mut pos = vec![usize::MAX; n];
        pos[root] = 0;
        let mut code = Vec::with_capacity(n * (n - 1) / 2);
        bfs_label(g, &mut order, &mut pos, 0, &mut code, &mut best);
    }
    best.unwrap_or_default()
}

fn bfs_label(
    g: &Graph,
    order: &mut Vec<Vertex>,
    pos: &mut [usize],
    mut head: usize,
    code: &mut Vec<bool>,
    best: &mut Option<Vec<bool>>,
) {
    let n = g.vertex_count();
    if order.len() == n {
        if best.as_ref().is_none_or(|b| *code < *b) {
            *best = Some(code.clone());
        }
        return;
    }
    while !g.neighbours(order[head]).any(|y| pos[y] == usize::MAX) {
        head += 1;
    }
    let x = order[head];
    let children: Vec<Vertex> = g.neighbours(x).filter(|&y| pos[y] == usize::MAX).collect();
    for y in children {
        let mark = code.len();
        let k = order.len();
        code.extend(order.iter().map(|&z| g.adjacent(y, z)));
        let prune = best.as_ref().is_some_and(|b| code[..] > b[..code.len()]);
        if !prune {
            order.push(y);
            pos[y] = k;
            bfs_label(g, order, pos, head, code, best);
            pos[y] = usize::MAX;
            order.pop();
        }
        code.truncate(mark);
    }
}

/// One representative per isomorphism class of connected cubic graphs on `n` vertices.
pub fn connected_cubic_graphs(n: usize) -> Vec<Graph> {
    if n < 4 || n % 2 == 1 {
        return Vec::new();
    }
    let mut adj = vec![Vec::<Vertex>::new(); n];
    let mut found = BTreeSet::new();
    let mut out = Vec::new();
    extend_cubic(&mut adj, 0, &mut |adj| {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| adj[u].iter().copied().filter(move |&v| u < v).map(move |v| (u, v)))
            .collect();
        let g = Graph::from_edge_list(n, &edges);
        if is_connected(&g) && found.insert(canonical_code_connected(&g)) {
            out.push(g);
        }
    });
    out
}

/// Adds edges at the smallest deficient vertex. Partners are touched deficient vertices above
/// it or the first untouched vertex (untouched vertices are interchangeable), and new partners
/// of one vertex are added in increasing order.
fn extend_cubic(adj: &mut Vec<Vec<Vertex>>, min_partner: usize, emit: &mut dyn FnMut(&[Vec<Vertex>])) {
    let n = adj.len();
    let Some(u) = (0..n).find(|&v| adj[v].len() < 3) else {
        emit(adj);
        return;
    };
    let first_untouched = (u + 1..n).find(|&v| adj[v].is_empty());
    for v in min_partner.max(u + 1)..n {
        let touched = !adj[v].is_empty();
        if adj[v].len() >= 3 || adj[u].contains(&v) || (!touched && Some(v) != first_untouched) {
            continue;
        }
        adj[u].push(v);
        adj[v].push(u);
        let next_min = if adj[u].len() < 3 { v + 1 } else { 0 };
        extend_cubic(adj, next_min, emit);
        adj[u].pop();
        adj[v].pop();
    }
}
