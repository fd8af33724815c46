//! Degree split into L and H, and the greedy colouring of G[L] in which every vertex with an
//! L-neighbour sees its designated (lowest-id) L-neighbour with a unique colour.

use serde::Serialize;

use crate::colouring::Colour;
use crate::config::Thresholds;
use crate::error::ConfigError;
use crate::graph::{Adjacency, Graph, Vertex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSplit {
    pub low: Vec<Vertex>,
    pub high: Vec<Vertex>,
    is_low: Vec<bool>,
}

impl DegreeSplit {
    pub fn is_low(&self, v: Vertex) -> bool {
        self.is_low[v]
    }

    pub fn is_high(&self, v: Vertex) -> bool {
        !self.is_low[v]
    }
}

pub fn split_lh(g: &Graph, delta: usize, th: &Thresholds) -> Result<DegreeSplit, ConfigError> {
    let actual = g.max_degree();
    if actual > delta {
        return Err(ConfigError::DegreeExceedsDelta { actual, delta });
    }
    let is_low: Vec<bool> = g.vertices().map(|v| th.low_rule.is_low(g.degree(v))).collect();
    let (low, high): (Vec<Vertex>, Vec<Vertex>) = g.vertices().partition(|&v| is_low[v]);
    Ok(DegreeSplit { low, high, is_low })
}

#[derive(Clone, Debug)]
pub struct LowColouring {
    /// Colour of each L vertex, ids in `0..palette_size`; `None` off L.
    pub colours: Vec<Option<Colour>>,
    /// ℓ(u): the lowest-id L-neighbour of `u`, for every `u` with one.
    pub ell: Vec<Option<Vertex>>,
    pub palette_size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LowDiagnostics {
    pub low_count: usize,
    pub high_count: usize,
    pub colours_used: usize,
    pub palette_size: usize,
}

impl LowColouring {
    pub fn colours_used(&self) -> usize {
        let mut used: Vec<_> = self.colours.iter().flatten().collect();
        used.sort_unstable();
        used.dedup();
        used.len()
    }

    pub fn diagnostics(&self, split: &DegreeSplit) -> LowDiagnostics {
        LowDiagnostics {
            low_count: split.low.len(),
            high_count: split.high.len(),
            colours_used: self.colours_used(),
            palette_size: self.palette_size,
        }
    }
}

/// Processes L in ascending id order. Each vertex avoids the colours of its earlier
/// L-neighbours and of ℓ(u) for every neighbour u with ℓ(u) ≠ itself.
pub fn colour_low(g: &Graph, split: &DegreeSplit, th: &Thresholds) -> LowColouring {
    let n = g.vertex_count();
    let ell: Vec<Option<Vertex>> = (0..n)
        .map(|u| g.neighbours(u).filter(|&w| split.is_low(w)).min())
        .collect();
    let mut colours: Vec<Option<Colour>> = vec![None; n];
    let mut forbidden: Vec<Colour> = Vec::new();
    for &v in &split.low {
        forbidden.clear();
        for u in g.neighbours(v) {
            if split.is_low(u) {
                forbidden.extend(colours[u]);
            }
            if let Some(d) = ell[u].filter(|&d| d != v) {
                forbidden.extend(colours[d]);
            }
        }
        forbidden.sort_unstable();
        forbidden.dedup();
        let c = forbidden
            .iter()
            .enumerate()
            .find(|&(i, &c)| c != i as Colour)
            .map_or(forbidden.len(), |(i, _)| i) as Colour;
        colours[v] = Some(c);
    }
    LowColouring { colours, ell, palette_size: th.low_palette_size }
}
