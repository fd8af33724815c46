//! Colouring a subset Z of H with the mid palette: the extended neighbourhood N*, the sample
//! Y ⊆ H, a uniform random colouring of Y, and the retained partial colouring on Z.

use serde::Serialize;

use crate::colouring::Colour;
use crate::config::{PipelineConfig, Thresholds};
use crate::error::StageError;
use crate::graph::{Adjacency, Graph, Vertex};
use crate::lll::{run_resampler, BadEvent, ResampleSummary, Value, VariableSpace};
use crate::stage_low::DegreeSplit;

/// N*(v) for every v ∈ H, as sorted vertex lists; empty for L vertices.
///
/// N*(v) = (N(v) ∩ H) ∪ {w ∈ H : some u ∈ N(v) ∩ N(w) has deg(u) ≤ small_deg}. The second
/// part contains v itself whenever v has a neighbour of small degree.
#[derive(Clone, Debug)]
pub struct NStarIndex {
    sets: Vec<Vec<Vertex>>,
}

impl NStarIndex {
    pub fn get(&self, v: Vertex) -> &[Vertex] {
        &self.sets[v]
    }

    pub fn max_size(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn compute_nstar(g: &Graph, split: &DegreeSplit, small_deg: usize) -> NStarIndex {
    let mut sets = vec![Vec::new(); g.vertex_count()];
    for &v in &split.high {
        let mut s: Vec<Vertex> = g.neighbours(v).filter(|&u| split.is_high(u)).collect();
        for u in g.neighbours(v) {
            if g.degree(u) <= small_deg {
                s.extend(g.neighbours(u).filter(|&w| split.is_high(w)));
            }
        }
        s.sort_unstable();
        s.dedup();
        sets[v] = s;
    }
    NStarIndex { sets }
}

enum YEvent {
    /// v ∈ L with more than small_deg H-neighbours: all of them landed in Y.
    Covered { scope: Vec<usize> },
    /// v ∈ H: too few neighbours in Y (checked only when `lower` holds) or too many of N*(v).
    Count { scope: Vec<usize>, nbr: Vec<usize>, lower: bool, y_min: f64, cap: f64 },
}

impl BadEvent for YEvent {
    fn scope(&self) -> &[usize] {
        match self {
            YEvent::Covered { scope } | YEvent::Count { scope, .. } => scope,
        }
    }

    fn holds(&self, values: &[Value]) -> bool {
        match self {
            YEvent::Covered { scope } => scope.iter().all(|&x| values[x] == 1),
            YEvent::Count { scope, nbr, lower, y_min, cap } => {
                let in_nbr = nbr.iter().filter(|&&x| values[x] == 1).count();
                let in_star = scope.iter().filter(|&&x| values[x] == 1).count();
                (*lower && (in_nbr as f64) < *y_min) || in_star as f64 > *cap
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct YSample {
    pub members: Vec<Vertex>,
    #[serde(skip)]
    pub in_y: Vec<bool>,
    pub resampling: ResampleSummary,
}

fn var_index(split: &DegreeSplit, n: usize) -> Vec<usize> {
    let mut idx = vec![usize::MAX; n];
    for (i, &v) in split.high.iter().enumerate() {
        idx[v] = i;
    }
    idx
}

/// Vertices of H whose whole neighbourhood lies in H (and is nonempty).
fn closed_high(g: &Graph, split: &DegreeSplit, v: Vertex) -> bool {
    split.is_high(v) && g.degree(v) > 0 && g.neighbours(v).all(|u| split.is_high(u))
}

/// Samples Y ⊆ H with probability `th.y_prob` per vertex and resamples until no bad event holds.
pub fn sample_y(
    g: &Graph,
    split: &DegreeSplit,
    nstar: &NStarIndex,
    cfg: &PipelineConfig,
    th: &Thresholds,
    seed: u64,
) -> Result<YSample, StageError> {
    let n = g.vertex_count();
    let idx = var_index(split, n);
    let mut events = Vec::new();
    let mut kinds = Vec::new();
    for &v in &split.low {
        let scope: Vec<usize> = g.neighbours(v).filter(|&u| split.is_high(u)).map(|u| idx[u]).collect();
        if scope.len() > cfg.small_deg {
            events.push(YEvent::Covered { scope });
            kinds.push("A");
        }
    }
    for &v in &split.high {
        let scope: Vec<usize> = nstar.get(v).iter().map(|&u| idx[u]).collect();
        let nbr: Vec<usize> = g.neighbours(v).filter(|&u| split.is_high(u)).map(|u| idx[u]).collect();
        events.push(YEvent::Count {
            scope,
            nbr,
            lower: closed_high(g, split, v),
            y_min: th.y_min,
            cap: th.nstar_cap,
        });
        kinds.push("B");
    }
    let space = VariableSpace::bernoulli(split.high.len(), th.y_prob.min(1.0));
    let (values, log) = run_resampler(space, &events, cfg.max_rounds_for(events.len()), seed);
    if !log.is_clean() {
        return Err(StageError::Timeout { stage: "sample_y", rounds: log.rounds });
    }
    let mut in_y = vec![false; n];
    let members: Vec<Vertex> = split.high.iter().copied().filter(|&v| values[idx[v]] == 1).collect();
    for &v in &members {
        in_y[v] = true;
    }
    let sample = YSample { members, in_y, resampling: log.summarize(|id| kinds[id]) };
    let problems = verify_y(g, split, nstar, cfg, th, &sample.in_y);
    if !problems.is_empty() {
        return Err(StageError::Verification { stage: "sample_y", details: problems.join("; ") });
    }
    Ok(sample)
}

/// Direct re-check of the two sample guarantees; returns one message per violation.
pub fn verify_y(
    g: &Graph,
    split: &DegreeSplit,
    nstar: &NStarIndex,
    cfg: &PipelineConfig,
    th: &Thresholds,
    in_y: &[bool],
) -> Vec<String> {
    let mut problems = Vec::new();
    for &v in &split.low {
        let hn: Vec<Vertex> = g.neighbours(v).filter(|&u| split.is_high(u)).collect();
        if hn.len() > cfg.small_deg && hn.iter().all(|&u| in_y[u]) {
            problems.push(format!("low vertex {v} has all {} H-neighbours in Y", hn.len()));
        }
    }
    for &v in &split.high {
        let in_nbr = g.neighbours(v).filter(|&u| in_y[u]).count();
        let in_star = nstar.get(v).iter().filter(|&&u| in_y[u]).count();
        if in_nbr > in_star {
            problems.push(format!("vertex {v}: |N ∩ Y| = {in_nbr} exceeds |N* ∩ Y| = {in_star}"));
        }
        if in_star as f64 > th.nstar_cap {
            problems.push(format!("vertex {v}: |N* ∩ Y| = {in_star} above cap {}", th.nstar_cap));
        }
        if closed_high(g, split, v) && (in_nbr as f64) < th.y_min {
            problems.push(format!("vertex {v}: |N ∩ Y| = {in_nbr} below {}", th.y_min));
        }
    }
    problems
}

/// C_v: every y ∈ N(v) ∩ Y shares its colour with some z ∈ ((N*(y) ∪ N(v)) − {y}) ∩ Y.
struct ColourEvent<'a> {
    scope: Vec<usize>,
    /// variables of N(v) ∩ Y
    nbr: Vec<usize>,
    /// variables of N*(y) ∩ Y, per Y vertex
    star: &'a [Vec<usize>],
}

fn is_bad(y: usize, nbr: &[usize], star: &[usize], values: &[Value]) -> bool {
    let c = values[y];
    nbr.iter().chain(star).any(|&z| z != y && values[z] == c)
}

impl BadEvent for ColourEvent<'_> {
    fn scope(&self) -> &[usize] {
        &self.scope
    }

    fn holds(&self, values: &[Value]) -> bool {
        self.nbr.iter().all(|&y| is_bad(y, &self.nbr, &self.star[y], values))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MidDiagnostics {
    pub y_size: usize,
    pub z_size: usize,
    pub palette_size: usize,
    pub colours_used: usize,
    pub c_events: usize,
    /// Mean and maximum over C_v events of the fraction of bad w ∈ N(v) ∩ Y at the end.
    pub bad_fraction_mean: f64,
    pub bad_fraction_max: f64,
    pub y_resampling: ResampleSummary,
    pub colour_resampling: ResampleSummary,
}

#[derive(Clone, Debug)]
pub struct MidResult {
    pub y: Vec<Vertex>,
    /// c_y for y ∈ Y, local ids in `0..palette_size`.
    pub c_y: Vec<Option<Colour>>,
    /// Retained colours: c_y restricted to Z.
    pub f_mid: Vec<Option<Colour>>,
    pub z: Vec<Vertex>,
    pub palette_size: usize,
    pub diagnostics: MidDiagnostics,
}

impl MidResult {
    /// Result with Y = Z = ∅, for instances built by hand.
    pub fn empty(n: usize, palette_size: usize) -> Self {
        let idle = ResampleSummary {
            outcome: crate::lll::Outcome::Clean,
            rounds: 0,
            violated_trace: vec![0],
            by_kind: Vec::new(),
        };
        MidResult {
            y: Vec::new(),
            c_y: vec![None; n],
            f_mid: vec![None; n],
            z: Vec::new(),
            palette_size,
            diagnostics: MidDiagnostics {
                y_size: 0,
                z_size: 0,
                palette_size,
                colours_used: 0,
                c_events: 0,
                bad_fraction_mean: 0.0,
                bad_fraction_max: 0.0,
                y_resampling: idle.clone(),
                colour_resampling: idle,
            },
        }
    }

    pub fn in_z(&self, v: Vertex) -> bool {
        self.f_mid[v].is_some()
    }
}

/// Colours Y uniformly from `th.mid_palette` colours, resampling until every C_v is false, and
/// retains the colours unique within N*(y) ∩ Y.
pub fn colour_mid(
    g: &Graph,
    split: &DegreeSplit,
    nstar: &NStarIndex,
    sample: &YSample,
    cfg: &PipelineConfig,
    th: &Thresholds,
    seed: u64,
) -> Result<MidResult, StageError> {
    let n = g.vertex_count();
    let ys = &sample.members;
    let mut idx = vec![usize::MAX; n];
    for (i, &y) in ys.iter().enumerate() {
        idx[y] = i;
    }
    let star: Vec<Vec<usize>> = ys
        .iter()
        .map(|&y| nstar.get(y).iter().filter(|&&z| sample.in_y[z]).map(|&z| idx[z]).collect())
        .collect();
    let mut events = Vec::new();
    for &v in &split.high {
        if !closed_high(g, split, v) {
            continue;
        }
        let nbr: Vec<usize> = g.neighbours(v).filter(|&u| sample.in_y[u]).map(|u| idx[u]).collect();
        let mut scope = nbr.clone();
        for &y in &nbr {
            scope.extend_from_slice(&star[y]);
        }
        scope.sort_unstable();
        scope.dedup();
        events.push(ColourEvent { scope, nbr, star: &star });
    }
    let palette = u32::try_from(th.mid_palette).map_err(|_| {
        StageError::Infeasible(format!("mid palette size {} does not fit in 32 bits", th.mid_palette))
    })?;
    let space = VariableSpace::uniform(ys.len(), palette);
    let (values, log) = run_resampler(space, &events, cfg.max_rounds_for(events.len()), seed);
    if !log.is_clean() {
        return Err(StageError::Timeout { stage: "colour_mid", rounds: log.rounds });
    }

    let mut c_y = vec![None; n];
    let mut f_mid = vec![None; n];
    let mut z = Vec::new();
    for (i, &y) in ys.iter().enumerate() {
        c_y[y] = Some(values[i]);
        if !star[i].iter().any(|&j| j != i && values[j] == values[i]) {
            f_mid[y] = Some(values[i]);
            z.push(y);
        }
    }

    let mut fractions = Vec::with_capacity(events.len());
    for e in &events {
        if !e.nbr.is_empty() {
            let bad = e.nbr.iter().filter(|&&y| is_bad(y, &e.nbr, &star[y], &values)).count();
            fractions.push(bad as f64 / e.nbr.len() as f64);
        }
    }
    let mut used: Vec<Colour> = f_mid.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let diagnostics = MidDiagnostics {
        y_size: ys.len(),
        z_size: z.len(),
        palette_size: th.mid_palette,
        colours_used: used.len(),
        c_events: events.len(),
        bad_fraction_mean: if fractions.is_empty() {
            0.0
        } else {
            fractions.iter().sum::<f64>() / fractions.len() as f64
        },
        bad_fraction_max: fractions.iter().copied().fold(0.0, f64::max),
        y_resampling: sample.resampling.clone(),
        colour_resampling: log.summarize(|_| "C"),
    };
    let result = MidResult {
        y: ys.clone(),
        c_y,
        f_mid,
        z,
        palette_size: th.mid_palette,
        diagnostics,
    };
    let problems = verify_mid(g, split, nstar, cfg, &result);
    if !problems.is_empty() {
        return Err(StageError::Verification { stage: "colour_mid", details: problems.join("; ") });
    }
    Ok(result)
}

/// Whether some member of `nbrs` carries an f_mid colour that no other member of `nbrs` has.
pub fn has_unique_mid_colour(f_mid: &[Option<Colour>], nbrs: impl Iterator<Item = Vertex>) -> bool {
    let mut colours: Vec<Colour> = nbrs.filter_map(|u| f_mid[u]).collect();
    crate::verify::has_unique_colour(&mut colours)
}

/// Direct re-check of the mid-stage guarantees; returns one message per violation.
pub fn verify_mid(
    g: &Graph,
    split: &DegreeSplit,
    nstar: &NStarIndex,
    cfg: &PipelineConfig,
    mid: &MidResult,
) -> Vec<String> {
    let mut problems = Vec::new();
    let n = g.vertex_count();
    let in_y: Vec<bool> = (0..n).map(|v| mid.c_y[v].is_some()).collect();
    for &y in &mid.y {
        let c = mid.c_y[y];
        let unique = !nstar.get(y).iter().any(|&z| z != y && in_y[z] && mid.c_y[z] == c);
        if unique != mid.in_z(y) {
            problems.push(format!("retention of {y} disagrees with N* uniqueness"));
        }
    }
    for v in 0..n {
        if mid.f_mid[v].is_some() && !in_y[v] {
            problems.push(format!("vertex {v} retained outside Y"));
        }
        if let Some(c) = mid.f_mid[v] {
            if c as usize >= mid.palette_size {
                problems.push(format!("vertex {v} colour {c} outside the mid palette"));
            }
            if g.neighbours(v).any(|u| u > v && mid.f_mid[u] == Some(c)) {
                problems.push(format!("f_mid not proper at {v}"));
            }
        }
    }
    let mut seen = Vec::new();
    for u in 0..n {
        if g.degree(u) <= cfg.small_deg {
            seen.clear();
            seen.extend(g.neighbours(u).filter_map(|w| mid.f_mid[w]));
            let before = seen.len();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != before {
                problems.push(format!("small-degree vertex {u} sees a repeated mid colour"));
            }
        }
    }
    for v in 0..n {
        if g.degree(v) == 0 {
            continue;
        }
        let needs = if split.is_high(v) {
            closed_high(g, split, v)
        } else {
            g.neighbours(v).all(|u| mid.in_z(u))
        };
        if needs && !has_unique_mid_colour(&mid.f_mid, g.neighbours(v)) {
            problems.push(format!("vertex {v} has no uniquely mid-coloured neighbour"));
        }
    }
    problems
}
