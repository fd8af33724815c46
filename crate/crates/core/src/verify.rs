//! Ground-truth checks for proper and conflict-free colourings.
//!
//! Partial colourings are accepted. In partial mode an uncoloured neighbour is treated as
//! absent from the neighbourhood multiset; uncoloured vertices are reported separately.

use serde::{Deserialize, Serialize};

use crate::colouring::{Colour, Colouring};
use crate::error::ColouringError;
use crate::graph::{Adjacency, Vertex};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// Edges `(u, v)`, `u < v`, whose endpoints carry the same colour.
    pub proper_violations: Vec<(Vertex, Vertex)>,
    /// Non-isolated vertices with no colour of multiplicity exactly one among their neighbours.
    pub cf_violations: Vec<Vertex>,
    pub uncoloured: Vec<Vertex>,
    /// Coloured vertices whose colour lies in no declared palette.
    pub palette_violations: Vec<Vertex>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.proper_violations.is_empty()
            && self.cf_violations.is_empty()
            && self.uncoloured.is_empty()
            && self.palette_violations.is_empty()
    }
}

pub fn check_proper<G: Adjacency + ?Sized>(
    g: &G,
    c: &Colouring,
) -> Result<Vec<(Vertex, Vertex)>, ColouringError> {
    if let Some(&vertex) = c.palette_violations().first() {
        return Err(ColouringError::OutsidePalettes { vertex, colour: c.get(vertex).unwrap() });
    }
    Ok(monochromatic_edges(g, c))
}

fn monochromatic_edges<G: Adjacency + ?Sized>(g: &G, c: &Colouring) -> Vec<(Vertex, Vertex)> {
    let mut out = Vec::new();
    for u in g.vertices() {
        let Some(cu) = c.get(u) else { continue };
        let mut bad: Vec<_> = g.neighbours(u).filter(|&v| u < v && c.get(v) == Some(cu)).collect();
        bad.sort_unstable();
        out.extend(bad.into_iter().map(|v| (u, v)));
    }
    out
}

/// True when some colour occurs exactly once in `colours`.
pub fn has_unique_colour(colours: &mut [Colour]) -> bool {
    colours.sort_unstable();
    let mut i = 0;
    while i < colours.len() {
        let mut j = i + 1;
        while j < colours.len() && colours[j] == colours[i] {
            j += 1;
        }
        if j - i == 1 {
            return true;
        }
        i = j;
    }
    false
}

/// Colour-multiset uniqueness test on an arbitrary vertex set (uncoloured members skipped).
pub fn set_has_unique_colour<I: IntoIterator<Item = Vertex>>(c: &Colouring, set: I) -> bool {
    let mut colours: Vec<Colour> = set.into_iter().filter_map(|v| c.get(v)).collect();
    has_unique_colour(&mut colours)
}

pub fn check_conflict_free<G: Adjacency + ?Sized>(g: &G, c: &Colouring) -> Vec<Vertex> {
    let mut buf = Vec::new();
    g.vertices()
        .filter(|&v| {
            if g.degree(v) == 0 {
                return false;
            }
            buf.clear();
            buf.extend(g.neighbours(v).filter_map(|u| c.get(u)));
            !has_unique_colour(&mut buf)
        })
        .collect()
}

pub fn check_pcf<G: Adjacency + ?Sized>(g: &G, c: &Colouring) -> ViolationReport {
    ViolationReport {
        proper_violations: monochromatic_edges(g, c),
        cf_violations: check_conflict_free(g, c),
        uncoloured: g.vertices().filter(|&v| c.get(v).is_none()).collect(),
        palette_violations: c.palette_violations(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::Palette;
    use crate::graph::Graph;

    fn total(g_colours: &[Colour]) -> Colouring {
        Colouring::from_vec("test", g_colours.to_vec())
    }

    #[test]
    fn proper_examples() {
        let c5 = Graph::cycle(5);
        assert!(check_proper(&c5, &total(&[1, 2, 3, 4, 5])).unwrap().is_empty());
        assert_eq!(check_proper(&Graph::complete(2), &total(&[1, 1])).unwrap(), vec![(0, 1)]);
        assert!(check_proper(&Graph::path(3), &total(&[1, 2, 1])).unwrap().is_empty());
    }

    #[test]
    fn colour_outside_palettes_is_an_error() {
        let mut c = Colouring::new(2);
        c.add_palette(Palette::new("low", 0, 1)).unwrap();
        c.set(0, 0);
        c.set(1, 7);
        assert_eq!(
            check_proper(&Graph::complete(2), &c),
            Err(ColouringError::OutsidePalettes { vertex: 1, colour: 7 })
        );
        assert_eq!(check_pcf(&Graph::complete(2), &c).palette_violations, vec![1]);
    }

    #[test]
    fn conflict_free_examples() {
        // neighbourhoods: v1 {v0,v2} = {1,1}, v2 {v1,v3} = {2,2}
        let c5 = Graph::cycle(5);
        assert_eq!(check_conflict_free(&c5, &total(&[1, 2, 1, 2, 3])), vec![1, 2]);
        assert!(check_conflict_free(&Graph::complete(2), &total(&[1, 2])).is_empty());
        assert!(check_conflict_free(&Graph::complete(4), &total(&[0, 1, 2, 3])).is_empty());
    }

    #[test]
    fn pcf_examples() {
        let c5 = Graph::cycle(5);
        assert!(check_pcf(&c5, &total(&[0, 1, 2, 3, 4])).is_empty());
        assert!(!check_pcf(&c5, &total(&[0, 1, 2, 3, 1])).is_empty());
        let e = Graph::empty(3);
        let mut c = Colouring::new(3);
        let r = check_pcf(&e, &c);
        assert!(r.cf_violations.is_empty() && r.proper_violations.is_empty());
        assert_eq!(r.uncoloured, vec![0, 1, 2]);
        for v in 0..3 {
            c.set(v, 0);
        }
        c.add_palette(Palette::new("p", 0, 0)).unwrap();
        assert!(check_pcf(&e, &c).is_empty());
        assert!(check_pcf(&Graph::empty(0), &Colouring::new(0)).is_empty());
    }

    #[test]
    fn partial_mode_ignores_uncoloured_neighbours() {
        let star = Graph::star(3);
        let mut c = Colouring::new(4);
        c.add_palette(Palette::new("p", 0, 5)).unwrap();
        c.set(1, 0);
        c.set(2, 0);
        // centre sees {0, 0}; leaves see nothing coloured
        assert_eq!(check_conflict_free(&star, &c), vec![0, 1, 2, 3]);
        c.set(3, 1);
        assert_eq!(check_conflict_free(&star, &c), vec![1, 2, 3]);
    }
}
