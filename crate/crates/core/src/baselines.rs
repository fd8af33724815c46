//! Reference solvers: greedy proper colouring, greedy PCF colouring and an exact search.

use thiserror::Error;

use crate::colouring::{Colour, Colouring};
use crate::error::ColouringError;
use crate::graph::{Adjacency, Graph, Vertex};

fn check_permutation(n: usize, order: &[Vertex]) -> Result<(), ColouringError> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(ColouringError::NotAPermutation);
    }
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(ColouringError::NotAPermutation);
        }
    }
    Ok(())
}

fn smallest_absent(forbidden: &mut Vec<Colour>) -> Colour {
    forbidden.sort_unstable();
    forbidden.dedup();
    forbidden
        .iter()
        .enumerate()
        .find(|&(i, &c)| c != i as Colour)
        .map_or(forbidden.len() as Colour, |(i, _)| i as Colour)
}

pub fn ascending_order(g: &Graph) -> Vec<Vertex> {
    g.vertices().collect()
}

/// Smallest-free-colour greedy over `order`; uses at most Δ+1 colours.
pub fn greedy_proper(g: &Graph, order: &[Vertex]) -> Result<Colouring, ColouringError> {
    check_permutation(g.vertex_count(), order)?;
    let mut colours: Vec<Option<Colour>> = vec![None; g.vertex_count()];
    let mut forbidden = Vec::new();
    for &v in order {
        forbidden.clear();
        forbidden.extend(g.neighbours(v).filter_map(|u| colours[u]));
        colours[v] = Some(smallest_absent(&mut forbidden));
    }
    Ok(Colouring::from_vec("greedy", colours.into_iter().map(Option::unwrap).collect()))
}

/// Greedy PCF colouring with at most 2Δ+1 colours.
///
/// Every non-isolated `u` designates its earliest neighbour in `order`; each vertex avoids the
/// colours of its earlier neighbours and of the designated neighbour of each of its own
/// neighbours, so every designated vertex ends up uniquely coloured in that neighbourhood.
pub fn greedy_pcf(g: &Graph, order: &[Vertex]) -> Result<Colouring, ColouringError> {
    let n = g.vertex_count();
    check_permutation(n, order)?;
    let mut rank = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let designated: Vec<Option<Vertex>> =
        g.vertices().map(|u| g.neighbours(u).min_by_key(|&w| rank[w])).collect();
    let mut colours: Vec<Option<Colour>> = vec![None; n];
    let mut forbidden = Vec::new();
    for &v in order {
        forbidden.clear();
        forbidden.extend(g.neighbours(v).filter_map(|u| colours[u]));
        for u in g.neighbours(v) {
            if let Some(d) = designated[u].filter(|&d| d != v) {
                forbidden.extend(colours[d]);
            }
        }
        colours[v] = Some(smallest_absent(&mut forbidden));
    }
    Ok(Colouring::from_vec("greedy-pcf", colours.into_iter().map(Option::unwrap).collect()))
}

pub const DEFAULT_EXACT_VERTEX_CAP: usize = 12;

#[derive(Clone, Debug)]
pub struct ExactResult {
    pub chi_pcf: usize,
    pub witness: Colouring,
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("search budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("graph has {n} vertices, exact search is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("no proper conflict-free colouring with at most {0} colours")]
    NoColouringWithin(usize),
    #[error("max_colours must be at least 1")]
    ZeroColours,
}

/// Minimum number of colours of a total PCF colouring, with a witness.
/// Colour counts are tried upward from 1, so the result is certified minimal by the
/// exhausted searches below it.
pub fn exact_pcf(g: &Graph, max_colours: usize, budget: u64) -> Result<ExactResult, ExactError> {
    exact_pcf_capped(g, max_colours, budget, DEFAULT_EXACT_VERTEX_CAP)
}

pub fn exact_pcf_capped(
    g: &Graph,
    max_colours: usize,
    budget: u64,
    vertex_cap: usize,
) -> Result<ExactResult, ExactError> {
    let n = g.vertex_count();
    if n > vertex_cap {
        return Err(ExactError::TooLarge { n, cap: vertex_cap });
    }
    if max_colours == 0 {
        return Err(ExactError::ZeroColours);
    }
    if n == 0 {
        return Ok(ExactResult { chi_pcf: 0, witness: Colouring::new(0), nodes_explored: 0 });
    }
    let mut search = ExactSearch::new(g, budget);
    for k in 1..=max_colours {
        if let Some(colours) = search.run(k)? {
            return Ok(ExactResult {
                chi_pcf: k,
                witness: Colouring::from_vec("exact", colours),
                nodes_explored: search.nodes,
            });
        }
    }
    Err(ExactError::NoColouringWithin(max_colours))
}

struct ExactSearch<'g> {
    g: &'g Graph,
    order: Vec<Vertex>,
    /// vertices whose neighbourhood is fully coloured once `order[i]` is coloured
    completes_at: Vec<Vec<Vertex>>,
    colours: Vec<Option<Colour>>,
    nodes: u64,
    budget: u64,
}

impl<'g> ExactSearch<'g> {
    fn new(g: &'g Graph, budget: u64) -> Self {
        let n = g.vertex_count();
        // breadth-first from the highest-degree vertex of each component so that
        // neighbourhoods close early
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        let mut by_degree: Vec<Vertex> = g.vertices().collect();
        by_degree.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
        for root in by_degree {
            if placed[root] {
                continue;
            }
            placed[root] = true;
            let mut head = order.len();
            order.push(root);
            while head < order.len() {
                let v = order[head];
                head += 1;
                for u in g.neighbours(v) {
                    if !placed[u] {
                        placed[u] = true;
                        order.push(u);
                    }
                }
            }
        }
        let mut position = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let mut completes_at = vec![Vec::new(); n];
        for x in g.vertices() {
            if let Some(last) = g.neighbours(x).map(|u| position[u]).max() {
                completes_at[last].push(x);
            }
        }
        ExactSearch { g, order, completes_at, colours: vec![None; n], nodes: 0, budget }
    }

    fn run(&mut self, k: usize) -> Result<Option<Vec<Colour>>, ExactError> {
        self.colours.iter_mut().for_each(|c| *c = None);
        if self.dfs(0, k, 0)? {
            Ok(Some(self.colours.iter().map(|c| c.unwrap()).collect()))
        } else {
            Ok(None)
        }
    }

    fn dfs(&mut self, i: usize, k: usize, used: usize) -> Result<bool, ExactError> {
        if i == self.order.len() {
            return Ok(true);
        }
        let v = self.order[i];
        // symmetry: a new colour is always the next unused id
        for c in 0..k.min(used + 1) {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(ExactError::BudgetExceeded { budget: self.budget });
            }
            let c = c as Colour;
            if self.g.neighbours(v).any(|u| self.colours[u] == Some(c)) {
                continue;
            }
            self.colours[v] = Some(c);
            let feasible = self.completes_at[i].iter().all(|&x| {
                let mut seen: Vec<Colour> = self.g.neighbours(x).map(|u| self.colours[u].unwrap()).collect();
                crate::verify::has_unique_colour(&mut seen)
            });
            if feasible && self.dfs(i + 1, k, used.max(c as usize + 1))? {
                return Ok(true);
            }
            self.colours[v] = None;
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::check_pcf;

    fn colours(c: &Colouring) -> Vec<Colour> {
        c.assignment().iter().map(|c| c.unwrap()).collect()
    }

    #[test]
    fn greedy_proper_examples() {
        let k4 = Graph::complete(4);
        assert_eq!(colours(&greedy_proper(&k4, &[0, 1, 2, 3]).unwrap()), vec![0, 1, 2, 3]);
        let e = Graph::empty(4);
        assert_eq!(colours(&greedy_proper(&e, &ascending_order(&e)).unwrap()), vec![0; 4]);
        let c5 = Graph::cycle(5);
        assert_eq!(colours(&greedy_proper(&c5, &ascending_order(&c5)).unwrap()), vec![0, 1, 0, 1, 2]);
    }

    #[test]
    fn greedy_pcf_examples() {
        let p3 = Graph::path(3);
        assert_eq!(colours(&greedy_pcf(&p3, &[0, 1, 2]).unwrap()), vec![0, 1, 2]);
        let k2 = Graph::complete(2);
        assert_eq!(colours(&greedy_pcf(&k2, &[0, 1]).unwrap()), vec![0, 1]);
        // star with the centre (vertex 0) coloured last
        let star = Graph::star(4);
        let c = greedy_pcf(&star, &[1, 2, 3, 4, 0]).unwrap();
        assert_eq!(colours(&c), vec![2, 0, 1, 1, 1]);
        assert!(check_pcf(&star, &c).is_empty());
    }

    #[test]
    fn order_must_be_a_permutation() {
        let g = Graph::path(3);
        assert_eq!(greedy_pcf(&g, &[0, 1]).unwrap_err(), ColouringError::NotAPermutation);
        assert_eq!(greedy_proper(&g, &[0, 1, 1]).unwrap_err(), ColouringError::NotAPermutation);
        assert_eq!(greedy_proper(&g, &[0, 1, 5]).unwrap_err(), ColouringError::NotAPermutation);
    }

    #[test]
    fn exact_examples() {
        let c5 = exact_pcf(&Graph::cycle(5), 8, 1_000_000).unwrap();
        assert_eq!(c5.chi_pcf, 5);
        assert!(check_pcf(&Graph::cycle(5), &c5.witness).is_empty());
        assert_eq!(exact_pcf(&Graph::complete(4), 8, 1_000_000).unwrap().chi_pcf, 4);
        assert_eq!(exact_pcf(&Graph::path(3), 8, 1_000_000).unwrap().chi_pcf, 3);
        assert_eq!(exact_pcf(&Graph::empty(3), 8, 10).unwrap().chi_pcf, 1);
    }

    #[test]
    fn exact_errors() {
        assert_eq!(
            exact_pcf(&Graph::cycle(5), 8, 3).unwrap_err(),
            ExactError::BudgetExceeded { budget: 3 }
        );
        assert_eq!(exact_pcf(&Graph::cycle(5), 4, 1_000_000).unwrap_err(), ExactError::NoColouringWithin(4));
        assert!(matches!(exact_pcf(&Graph::empty(13), 2, 10), Err(ExactError::TooLarge { .. })));
    }
}
