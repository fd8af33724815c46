//! Partial vertex colourings with named, disjoint palette ranges, and their JSON file format.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ColouringError;
use crate::graph::Vertex;

pub type Colour = u32;

/// Inclusive colour-id range `lo..=hi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub name: String,
    pub lo: Colour,
    pub hi: Colour,
}

impl Palette {
    pub fn new(name: impl Into<String>, lo: Colour, hi: Colour) -> Self {
        Palette { name: name.into(), lo, hi }
    }

    pub fn contains(&self, c: Colour) -> bool {
        (self.lo..=self.hi).contains(&c)
    }

    pub fn size(&self) -> usize {
        (self.hi - self.lo) as usize + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Colouring {
    assignment: Vec<Option<Colour>>,
    palettes: Vec<Palette>,
}

impl Colouring {
    pub fn new(n: usize) -> Self {
        Colouring { assignment: vec![None; n], palettes: Vec::new() }
    }

    /// Total colouring from a dense vector with a single palette covering the used range.
    pub fn from_vec(name: &str, colours: Vec<Colour>) -> Self {
        let hi = colours.iter().copied().max().unwrap_or(0);
        Colouring {
            assignment: colours.into_iter().map(Some).collect(),
            palettes: vec![Palette::new(name, 0, hi)],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn add_palette(&mut self, palette: Palette) -> Result<(), ColouringError> {
        if palette.lo > palette.hi {
            return Err(ColouringError::InvalidPalette {
                name: palette.name,
                lo: palette.lo,
                hi: palette.hi,
            });
        }
        if let Some(other) = self
            .palettes
            .iter()
            .find(|p| p.lo <= palette.hi && palette.lo <= p.hi)
        {
            return Err(ColouringError::OverlappingPalettes(other.name.clone(), palette.name));
        }
        self.palettes.push(palette);
        Ok(())
    }

    pub fn palettes(&self) -> &[Palette] {
        &self.palettes
    }

    pub fn palette_of(&self, c: Colour) -> Option<&Palette> {
        self.palettes.iter().find(|p| p.contains(c))
    }

    pub fn get(&self, v: Vertex) -> Option<Colour> {
        self.assignment[v]
    }

    pub fn set(&mut self, v: Vertex, c: Colour) {
        self.assignment[v] = Some(c);
    }

    pub fn clear(&mut self, v: Vertex) {
        self.assignment[v] = None;
    }

    pub fn assignment(&self) -> &[Option<Colour>] {
        &self.assignment
    }

    pub fn is_total(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    pub fn coloured(&self) -> impl Iterator<Item = (Vertex, Colour)> + '_ {
        self.assignment.iter().enumerate().filter_map(|(v, c)| c.map(|c| (v, c)))
    }

    pub fn distinct_colours(&self) -> usize {
        self.assignment.iter().flatten().collect::<BTreeSet<_>>().len()
    }

    /// Vertices whose colour lies outside every palette.
    pub fn palette_violations(&self) -> Vec<Vertex> {
        self.coloured()
            .filter(|&(_, c)| self.palette_of(c).is_none())
            .map(|(v, _)| v)
            .collect()
    }

    pub fn to_file(&self) -> ColouringFile {
        ColouringFile {
            palettes: self.palettes.clone(),
            assignment: self.coloured().collect(),
        }
    }

    pub fn from_file(file: &ColouringFile, n: usize) -> Result<Self, ColouringError> {
        let mut c = Colouring::new(n);
        for p in &file.palettes {
            c.add_palette(p.clone())?;
        }
        for (&v, &colour) in &file.assignment {
            if v >= n {
                return Err(ColouringError::VertexOutOfRange { vertex: v, n });
            }
            c.set(v, colour);
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("colouring serializes")
    }
}

/// On-disk form: `{"palettes": [{"name","lo","hi"}...], "assignment": {"vertex": colour}}`.
/// Vertex keys are 0-based ids, written in ascending numeric order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColouringFile {
    pub palettes: Vec<Palette>,
    pub assignment: BTreeMap<Vertex, Colour>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_palettes_rejected() {
        let mut c = Colouring::new(3);
        c.add_palette(Palette::new("low", 0, 4)).unwrap();
        assert!(matches!(
            c.add_palette(Palette::new("mid", 4, 9)),
            Err(ColouringError::OverlappingPalettes(..))
        ));
        c.add_palette(Palette::new("mid", 5, 9)).unwrap();
        assert_eq!(c.palette_of(7).unwrap().name, "mid");
        assert!(c.add_palette(Palette::new("bad", 20, 10)).is_err());
    }

    #[test]
    fn json_round_trip_keeps_numeric_key_order() {
        let mut c = Colouring::new(12);
        c.add_palette(Palette::new("p", 0, 3)).unwrap();
        for v in [10, 2, 1] {
            c.set(v, (v % 4) as Colour);
        }
        let json = c.to_json();
        assert!(json.find("\"2\"").unwrap() < json.find("\"10\"").unwrap());
        let file: ColouringFile = serde_json::from_str(&json).unwrap();
        assert_eq!(Colouring::from_file(&file, 12).unwrap(), c);
        assert!(Colouring::from_file(&file, 5).is_err());
    }
}
