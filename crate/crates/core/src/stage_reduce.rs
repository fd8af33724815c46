//! The reduced instance G': H' = H − Z, the L vertices that still need service, merge edges
//! between H' vertices with many shared low-degree L-neighbours, and the reduction loop.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::config::{PipelineConfig, Thresholds};
use crate::graph::{Adjacency, Graph, GraphOverlay, Vertex};
use crate::stage_low::DegreeSplit;
use crate::stage_mid::{has_unique_mid_colour, MidResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalReason {
    Isolated,
    NeighbourInL,
    UniqueColouredHNeighbour,
    ReductionRule1,
    ReductionRule2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeProvenance {
    Merge,
    Rule2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AddedEdge {
    pub u: Vertex,
    pub v: Vertex,
    pub provenance: EdgeProvenance,
    /// The deleted L vertex behind a rule-2 edge.
    pub via: Option<Vertex>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReduceDiagnostics {
    pub hp_count: usize,
    pub lp_count: usize,
    pub removed_by_reason: BTreeMap<RemovalReason, usize>,
    pub added_by_provenance: BTreeMap<EdgeProvenance, usize>,
    pub max_hp_degree: usize,
    pub reduction_passes: usize,
}

#[derive(Clone, Debug)]
pub struct ReducedInstance<'g> {
    pub gprime: GraphOverlay<'g>,
    pub hp: Vec<Vertex>,
    pub lp: Vec<Vertex>,
    in_hp: Vec<bool>,
    in_lp: Vec<bool>,
    pub removed: Vec<(Vertex, RemovalReason)>,
    pub added_edges: Vec<AddedEdge>,
    pub diagnostics: ReduceDiagnostics,
}

impl<'g> ReducedInstance<'g> {
    pub fn in_hp(&self, v: Vertex) -> bool {
        self.in_hp[v]
    }

    pub fn in_lp(&self, v: Vertex) -> bool {
        self.in_lp[v]
    }

    /// N_{G'}(v) ∩ H'.
    pub fn hp_neighbours(&self, v: Vertex) -> Vec<Vertex> {
        hp_neighbours(&self.gprime, &self.in_hp, v)
    }

    /// |N_{G'}(v) ∩ L'|.
    pub fn lp_degree(&self, v: Vertex) -> usize {
        self.gprime.neighbours(v).filter(|&u| self.in_lp[u]).count()
    }

    /// Degree of `v` in G'[H'].
    pub fn hp_degree(&self, v: Vertex) -> usize {
        self.gprime.neighbours(v).filter(|&u| self.in_hp[u]).count()
    }

    pub fn reason(&self, v: Vertex) -> Option<RemovalReason> {
        self.removed.iter().find(|&&(w, _)| w == v).map(|&(_, r)| r)
    }
}

fn hp_neighbours(g: &GraphOverlay<'_>, in_hp: &[bool], v: Vertex) -> Vec<Vertex> {
    let mut s: Vec<Vertex> = g.neighbours(v).filter(|&u| in_hp[u]).collect();
    s.sort_unstable();
    s
}

/// How many members of `s` other than `u` are not adjacent to `u`, stopping at 2.
fn non_adjacent_count(g: &GraphOverlay<'_>, s: &[Vertex], u: Vertex) -> (usize, Option<Vertex>) {
    let mut count = 0;
    let mut first = None;
    for &x in s {
        if x != u && !g.adjacent(u, x) {
            count += 1;
            first.get_or_insert(x);
            if count >= 2 {
                break;
            }
        }
    }
    (count, first)
}

enum RuleHit {
    One,
    Two(Vertex, Vertex),
}

fn applicable_rule(g: &GraphOverlay<'_>, s: &[Vertex]) -> Option<RuleHit> {
    if s.len() <= 1 {
        return Some(RuleHit::One);
    }
    let counts: Vec<(usize, Option<Vertex>)> = s.iter().map(|&u| non_adjacent_count(g, s, u)).collect();
    if counts.iter().any(|&(c, _)| c == 0) {
        return Some(RuleHit::One);
    }
    s.iter()
        .zip(&counts)
        .find(|(_, &(c, _))| c == 1)
        .map(|(&u, &(_, other))| RuleHit::Two(u, other.expect("one non-neighbour recorded")))
}

pub fn build_reduced<'g>(
    g: &'g Graph,
    split: &DegreeSplit,
    mid: &MidResult,
    cfg: &PipelineConfig,
    th: &Thresholds,
) -> ReducedInstance<'g> {
    let n = g.vertex_count();
    let in_hp: Vec<bool> = (0..n).map(|v| split.is_high(v) && !mid.in_z(v)).collect();
    let hp: Vec<Vertex> = (0..n).filter(|&v| in_hp[v]).collect();
    let mut in_l = vec![false; n];
    let mut removed = Vec::new();
    for &v in &split.low {
        let reason = if g.degree(v) == 0 {
            Some(RemovalReason::Isolated)
        } else if g.neighbours(v).any(|u| split.is_low(u)) {
            Some(RemovalReason::NeighbourInL)
        } else if has_unique_mid_colour(&mid.f_mid, g.neighbours(v)) {
            Some(RemovalReason::UniqueColouredHNeighbour)
        } else {
            None
        };
        match reason {
            Some(r) => removed.push((v, r)),
            None => in_l[v] = true,
        }
    }

    let mut gprime = GraphOverlay::new(g);
    let mut added_edges = Vec::new();
    let mut shared: HashMap<(Vertex, Vertex), usize> = HashMap::new();
    for w in (0..n).filter(|&w| in_l[w]) {
        let s: Vec<Vertex> = g.neighbours(w).filter(|&u| in_hp[u]).collect();
        if s.len() > cfg.few_h_neighbours {
            continue;
        }
        for (i, &a) in s.iter().enumerate() {
            for &b in &s[i + 1..] {
                *shared.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
    }
    let mut merge: Vec<(Vertex, Vertex)> = shared
        .into_iter()
        .filter(|&(_, k)| k as f64 >= th.merge_threshold)
        .map(|(pair, _)| pair)
        .collect();
    merge.sort_unstable();
    for (u, v) in merge {
        if gprime.add_edge(u, v).expect("merge pair is valid") {
            added_edges.push(AddedEdge { u, v, provenance: EdgeProvenance::Merge, via: None });
        }
    }

    let mut passes = 0;
    loop {
        passes += 1;
        let mut changed = false;
        for v in 0..n {
            if !in_l[v] {
                continue;
            }
            let s = hp_neighbours(&gprime, &in_hp, v);
            match applicable_rule(&gprime, &s) {
                None => {}
                Some(RuleHit::One) => {
                    in_l[v] = false;
                    removed.push((v, RemovalReason::ReductionRule1));
                    changed = true;
                }
                Some(RuleHit::Two(a, b)) => {
                    in_l[v] = false;
                    removed.push((v, RemovalReason::ReductionRule2));
                    if gprime.add_edge(a, b).expect("rule-2 pair is valid") {
                        added_edges.push(AddedEdge {
                            u: a.min(b),
                            v: a.max(b),
                            provenance: EdgeProvenance::Rule2,
                            via: Some(v),
                        });
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let lp: Vec<Vertex> = (0..n).filter(|&v| in_l[v]).collect();
    let mut removed_by_reason = BTreeMap::new();
    for &(_, r) in &removed {
        *removed_by_reason.entry(r).or_insert(0) += 1;
    }
    let mut added_by_provenance = BTreeMap::new();
    for e in &added_edges {
        *added_by_provenance.entry(e.provenance).or_insert(0) += 1;
    }
    let max_hp_degree = hp
        .iter()
        .map(|&v| gprime.neighbours(v).filter(|&u| in_hp[u]).count())
        .max()
        .unwrap_or(0);
    let diagnostics = ReduceDiagnostics {
        hp_count: hp.len(),
        lp_count: lp.len(),
        removed_by_reason,
        added_by_provenance,
        max_hp_degree,
        reduction_passes: passes,
    };
    ReducedInstance { gprime, hp, lp, in_hp, in_lp: in_l, removed, added_edges, diagnostics }
}

/// Direct re-check of every structural guarantee of G'; returns one message per violation.
pub fn verify_reduced(
    g: &Graph,
    split: &DegreeSplit,
    mid: &MidResult,
    cfg: &PipelineConfig,
    th: &Thresholds,
    ri: &ReducedInstance<'_>,
) -> Vec<String> {
    let mut problems = Vec::new();
    let n = g.vertex_count();
    for v in 0..n {
        if ri.in_hp(v) != (split.is_high(v) && !mid.in_z(v)) {
            problems.push(format!("H' membership of {v} is not H − Z"));
        }
        if ri.in_lp(v) && !split.is_low(v) {
            problems.push(format!("{v} in L' but not in L"));
        }
    }
    for (u, v) in ri.gprime.extra_edges() {
        if !ri.in_hp(u) || !ri.in_hp(v) {
            problems.push(format!("added edge {u}-{v} leaves H'"));
        }
    }
    for &v in &ri.lp {
        let s = ri.hp_neighbours(v);
        if s.len() < 3 {
            problems.push(format!("L' vertex {v} has {} H'-neighbours", s.len()));
        }
        for &u in &s {
            if non_adjacent_count(&ri.gprime, &s, u).0 < 2 {
                problems.push(format!("L' vertex {v}: {u} misses fewer than two others"));
            }
        }
    }
    for &v in &ri.hp {
        let deg = ri.hp_degree(v);
        let low = g.neighbours(v).filter(|&u| split.is_low(u)).count();
        let own = g.degree(v) as f64 + cfg.few_h_neighbours as f64 * low as f64 / th.merge_threshold;
        if deg as f64 > own + 1e-9 || deg as f64 > th.hprime_degree_cap + 1e-9 {
            problems.push(format!("H' vertex {v} has G'[H'] degree {deg}, bound {own:.3}"));
        }
    }
    for &(v, reason) in &ri.removed {
        if reason == RemovalReason::NeighbourInL || g.degree(v) == 0 {
            continue;
        }
        if !g.neighbours(v).all(|u| split.is_high(u)) {
            problems.push(format!("removed {v} ({reason:?}) has an L-neighbour"));
            continue;
        }
        let s = ri.hp_neighbours(v);
        let dominated = s.iter().any(|&u| non_adjacent_count(&ri.gprime, &s, u).0 == 0);
        if !(has_unique_mid_colour(&mid.f_mid, g.neighbours(v)) || (!s.is_empty() && dominated)) {
            problems.push(format!("removed {v} ({reason:?}) has no exit certificate"));
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LowDegreeRule;

    fn empty_mid(n: usize) -> MidResult {
        MidResult::empty(n, 1)
    }

    fn setup(g: &Graph, tau: f64, merge: f64) -> (DegreeSplit, PipelineConfig, Thresholds) {
        let cfg = PipelineConfig::scaled(g.max_degree(), tau, merge, 0.5, 0.0, 1e9, 4, 2, 1.0);
        let th = cfg.thresholds().unwrap();
        assert_eq!(th.low_rule, LowDegreeRule::AtMost(tau));
        let split = crate::stage_low::split_lh(g, cfg.delta, &th).unwrap();
        (split, cfg, th)
    }

    /// Hubs `0..hubs` are joined to every vertex of a K_pad block so that they land in H;
    /// `extra` may use the vertices `hubs..hubs + extra_n`.
    fn with_padding(hubs: usize, pad: usize, extra: &[(Vertex, Vertex)], extra_n: usize) -> Graph {
        let base = hubs + extra_n;
        let mut edges: Vec<(Vertex, Vertex)> = extra.to_vec();
        for i in 0..pad {
            for j in (i + 1)..pad {
                edges.push((base + i, base + j));
            }
            for h in 0..hubs {
                edges.push((h, base + i));
            }
        }
        Graph::from_edge_list(base + pad, &edges)
    }

    #[test]
    fn inert_instance_keeps_g() {
        // hubs 0..3, L vertex 4 adjacent to 0,1,2 (pairwise non-adjacent hubs)
        let g = with_padding(3, 6, &[(4, 0), (4, 1), (4, 2)], 2);
        let (split, cfg, th) = setup(&g, 3.0, 1e9);
        assert!(split.is_low(4));
        let mid = empty_mid(g.vertex_count());
        let ri = build_reduced(&g, &split, &mid, &cfg, &th);
        assert_eq!(ri.lp, vec![4]);
        assert!(ri.added_edges.is_empty());
        assert!(verify_reduced(&g, &split, &mid, &cfg, &th, &ri).is_empty());
    }

    #[test]
    fn single_h_neighbour_triggers_rule_one() {
        let g = with_padding(3, 6, &[(4, 0)], 2);
        let (split, cfg, th) = setup(&g, 3.0, 1e9);
        let mid = empty_mid(g.vertex_count());
        let ri = build_reduced(&g, &split, &mid, &cfg, &th);
        assert_eq!(ri.reason(4), Some(RemovalReason::ReductionRule1));
        assert!(verify_reduced(&g, &split, &mid, &cfg, &th, &ri).is_empty());
    }

    #[test]
    fn rule_two_gadget() {
        // v = 4 sees hubs a=0, b=1, c=2 with a ~ b; rule 2 joins a and c.
        // w = 5 sees 0, 2, 3 with 3 ~ 2 only: after the new edge a-c, vertex 2 is adjacent to
        // both others and rule 1 removes w.
        let g = with_padding(4, 6, &[(0, 1), (4, 0), (4, 1), (4, 2), (5, 0), (5, 2), (5, 3), (2, 3)], 2);
        let (split, cfg, th) = setup(&g, 3.0, 1e9);
        assert!(split.is_low(4) && split.is_low(5));
        let mid = empty_mid(g.vertex_count());
        let ri = build_reduced(&g, &split, &mid, &cfg, &th);
        assert_eq!(ri.reason(4), Some(RemovalReason::ReductionRule2));
        assert_eq!(
            ri.added_edges,
            vec![AddedEdge { u: 0, v: 2, provenance: EdgeProvenance::Rule2, via: Some(4) }]
        );
        assert_eq!(ri.reason(5), Some(RemovalReason::ReductionRule1));
        assert!(ri.lp.is_empty());
        assert!(verify_reduced(&g, &split, &mid, &cfg, &th, &ri).is_empty());
    }

    #[test]
    fn merge_edges_respect_the_threshold() {
        // hubs 0..4; L vertices 4..7 each see hubs 0, 1 and one of 2, 3 so no reduction fires
        // on the pair (0, 1) alone; 3 shared neighbours meet a threshold of 3
        let extra = [(4, 0), (4, 1), (4, 2), (5, 0), (5, 1), (5, 3), (6, 0), (6, 1), (6, 2)];
        let g = with_padding(4, 6, &extra, 3);
        let (split, cfg, th) = setup(&g, 3.0, 3.0);
        let mid = empty_mid(g.vertex_count());
        let ri = build_reduced(&g, &split, &mid, &cfg, &th);
        assert!(ri
            .added_edges
            .iter()
            .any(|e| (e.u, e.v) == (0, 1) && e.provenance == EdgeProvenance::Merge));
        assert!(verify_reduced(&g, &split, &mid, &cfg, &th, &ri).is_empty());
        let (split, cfg, th) = setup(&g, 3.0, 4.0);
        let ri = build_reduced(&g, &split, &mid, &cfg, &th);
        assert!(!ri.added_edges.iter().any(|e| e.provenance == EdgeProvenance::Merge));
    }
}
