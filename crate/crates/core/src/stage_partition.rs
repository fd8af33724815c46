//! Random partition of H' into t parts: the nearby relation, dangerous L' vertices, μ_v and
//! the four bad-event families, with a direct re-check of the partition guarantees.

use serde::Serialize;

use crate::config::{PipelineConfig, Thresholds};
use crate::error::StageError;
use crate::graph::{Adjacency, Vertex};
use crate::lll::{run_resampler, BadEvent, ResampleSummary, Value, VariableSpace};
use crate::stage_reduce::ReducedInstance;

/// Symmetric relation on H': two vertices sharing at least `nearby_common` L' neighbours w
/// with |N_{G'}(w)| ≤ `few_h_neighbours`.
#[derive(Clone, Debug, Default)]
pub struct NearbyIndex {
    lists: Vec<Vec<Vertex>>,
}

impl NearbyIndex {
    pub fn nearby(&self, u: Vertex, v: Vertex) -> bool {
        self.lists[u].binary_search(&v).is_ok()
    }

    pub fn of(&self, v: Vertex) -> &[Vertex] {
        &self.lists[v]
    }

    pub fn pair_count(&self) -> usize {
        self.lists.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// S_v for v ∈ H': the L' neighbours of v with at most `few_h_neighbours` H'-neighbours.
pub fn small_lp_neighbours(ri: &ReducedInstance<'_>, cfg: &PipelineConfig, v: Vertex) -> Vec<Vertex> {
    let mut s: Vec<Vertex> = ri
        .gprime
        .neighbours(v)
        .filter(|&w| ri.in_lp(w) && ri.hp_neighbours(w).len() <= cfg.few_h_neighbours)
        .collect();
    s.sort_unstable();
    s
}

pub fn build_nearby(ri: &ReducedInstance<'_>, cfg: &PipelineConfig) -> NearbyIndex {
    let n = ri.gprime.vertex_count();
    let mut shared: std::collections::HashMap<(Vertex, Vertex), usize> = Default::default();
    for &w in &ri.lp {
        let s = ri.hp_neighbours(w);
        if s.len() > cfg.few_h_neighbours {
            continue;
        }
        for (i, &a) in s.iter().enumerate() {
            for &b in &s[i + 1..] {
                *shared.entry((a, b)).or_default() += 1;
            }
        }
    }
    let mut lists = vec![Vec::new(); n];
    for ((a, b), k) in shared {
        if k >= cfg.nearby_common {
            lists[a].push(b);
            lists[b].push(a);
        }
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    NearbyIndex { lists }
}

/// Assignment of every H' vertex to one of `t` parts (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub t: usize,
    h: Vec<Option<usize>>,
    pub parts: Vec<Vec<Vertex>>,
    verified: bool,
}

impl Partition {
    /// Unverified partition from an explicit assignment; `h[v]` is `None` off H'.
    pub fn from_assignment(t: usize, h: Vec<Option<usize>>) -> Self {
        let mut parts = vec![Vec::new(); t];
        for (v, p) in h.iter().enumerate() {
            if let Some(p) = *p {
                assert!(p < t, "part index {p} out of range for {t} parts");
                parts[p].push(v);
            }
        }
        Partition { t, h, parts, verified: false }
    }

    pub fn part_of(&self, v: Vertex) -> Option<usize> {
        self.h[v]
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.h
    }

    /// Runs [`verify_partition`] and marks the partition verified when it passes.
    pub fn verify(
        mut self,
        ri: &ReducedInstance<'_>,
        nearby: &NearbyIndex,
        cfg: &PipelineConfig,
        th: &Thresholds,
    ) -> Result<Partition, Vec<String>> {
        let problems = verify_partition(ri, nearby, cfg, th, &self);
        if problems.is_empty() {
            self.verified = true;
            Ok(self)
        } else {
            Err(problems)
        }
    }

    /// Whether the partition passed [`verify_partition`].
    pub fn is_verified(&self) -> bool {
        self.verified
    }
}

/// Direct evaluation of the dangerous predicate for `w ∈ L'`: for every u ∈ N_{G'}(w) ∩ H'
/// there is u' in u's part, u' ∈ N_{G'}(w), u' ≠ u, non-adjacent to u and not nearby u, and a
/// u'' ∈ N_{G'}(w) − (N_{G'}(u) ∪ {u, u'}) whose part meets N_{G'}(w) at least twice.
pub fn is_dangerous(w: Vertex, part: &Partition, ri: &ReducedInstance<'_>, nearby: &NearbyIndex) -> bool {
    let s = ri.hp_neighbours(w);
    let g = &ri.gprime;
    let in_part = |j: usize| s.iter().filter(|&&x| part.part_of(x) == Some(j)).count();
    s.iter().all(|&u| {
        s.iter().any(|&u1| {
            u1 != u
                && part.part_of(u1) == part.part_of(u)
                && !g.adjacent(u, u1)
                && !nearby.nearby(u, u1)
                && s.iter().any(|&u2| {
                    u2 != u
                        && u2 != u1
                        && !g.adjacent(u, u2)
                        && part.part_of(u2).is_some_and(|j| in_part(j) >= 2)
                })
        })
    })
}

/// μ_v: the sum over dangerous w ∈ S_v of |(N_{G'}(w) − N_{G'}(v) − {v}) ∩ H_{h_v}|.
pub fn compute_mu(
    v: Vertex,
    part: &Partition,
    ri: &ReducedInstance<'_>,
    nearby: &NearbyIndex,
    cfg: &PipelineConfig,
) -> usize {
    let Some(own) = part.part_of(v) else { return 0 };
    small_lp_neighbours(ri, cfg, v)
        .into_iter()
        .filter(|&w| is_dangerous(w, part, ri, nearby))
        .map(|w| {
            ri.hp_neighbours(w)
                .into_iter()
                .filter(|&z| z != v && !ri.gprime.adjacent(v, z) && part.part_of(z) == Some(own))
                .count()
        })
        .sum()
}

/// Per-w data shared by the D events: N_{G'}(w) ∩ H' as variables, with pairwise adjacency
/// and nearby flags.
struct WInfo {
    vars: Vec<usize>,
    adjacent: Vec<Vec<bool>>,
    nearby: Vec<Vec<bool>>,
}

impl WInfo {
    fn dangerous(&self, values: &[Value], counts: &mut Vec<u32>) -> bool {
        let k = self.vars.len();
        counts.clear();
        for &x in &self.vars {
            let p = values[x] as usize;
            if counts.len() <= p {
                counts.resize(p + 1, 0);
            }
            counts[p] += 1;
        }
        (0..k).all(|a| {
            let pa = values[self.vars[a]];
            // every valid u' is itself a u'' candidate, so a second candidate is needed
            let candidates = (0..k)
                .filter(|&b| b != a && !self.adjacent[a][b] && counts[values[self.vars[b]] as usize] >= 2)
                .count();
            candidates >= 2
                && (0..k).any(|b| {
                    b != a && values[self.vars[b]] == pa && !self.adjacent[a][b] && !self.nearby[a][b]
                })
        })
    }
}

enum PartEvent<'a> {
    /// v ∈ L' with many H'-neighbours: no part meets N_{G'}(v) exactly once.
    NoSingleton { scope: Vec<usize> },
    /// own-part G' degree above the bound
    Degree { scope: Vec<usize>, own: usize, nbrs: Vec<usize>, bound: f64 },
    /// own-part nearby count above the bound
    Nearby { scope: Vec<usize>, own: usize, nbrs: Vec<usize>, bound: f64 },
    /// μ_v above the slack; `terms` pairs a w with the variables μ counts for it
    Mu { scope: Vec<usize>, own: usize, terms: Vec<(usize, Vec<usize>)>, ws: &'a [WInfo], bound: f64 },
}

impl BadEvent for PartEvent<'_> {
    fn scope(&self) -> &[usize] {
        match self {
            PartEvent::NoSingleton { scope }
            | PartEvent::Degree { scope, .. }
            | PartEvent::Nearby { scope, .. }
            | PartEvent::Mu { scope, .. } => scope,
        }
    }

    fn holds(&self, values: &[Value]) -> bool {
        match self {
            PartEvent::NoSingleton { scope } => {
                let mut parts: Vec<Value> = scope.iter().map(|&x| values[x]).collect();
                !crate::verify::has_unique_colour(&mut parts)
            }
            PartEvent::Degree { own, nbrs, bound, .. } | PartEvent::Nearby { own, nbrs, bound, .. } => {
                let c = nbrs.iter().filter(|&&x| values[x] == values[*own]).count();
                c as f64 > *bound
            }
            PartEvent::Mu { own, terms, ws, bound, .. } => {
                let mut counts = Vec::new();
                let mut mu = 0usize;
                for (w, counted) in terms {
                    if ws[*w].dangerous(values, &mut counts) {
                        mu += counted.iter().filter(|&&x| values[x] == values[*own]).count();
                    }
                }
                mu as f64 > *bound
            }
        }
    }
}

/// The per-vertex bounds of the partition guarantees.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VertexBounds {
    pub degree: f64,
    pub nearby: f64,
    pub mu: f64,
}

pub fn vertex_bounds(ri: &ReducedInstance<'_>, th: &Thresholds, t: usize, v: Vertex) -> VertexBounds {
    let lp = ri.lp_degree(v) as f64;
    let t = t as f64;
    VertexBounds {
        degree: (th.hprime_degree_cap - lp) / t + th.slack,
        nearby: lp / (2.0 * t) + th.slack,
        mu: th.slack,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexRecord {
    pub vertex: Vertex,
    pub part: usize,
    pub own_part_degree: usize,
    pub own_part_nearby: usize,
    pub s_size: usize,
    pub mu: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionDiagnostics {
    pub t: usize,
    pub nearby_pairs: usize,
    pub vertices: Vec<VertexRecord>,
    pub dangerous: Vec<Vertex>,
    pub resampling: ResampleSummary,
}

pub fn partition_h(
    ri: &ReducedInstance<'_>,
    nearby: &NearbyIndex,
    cfg: &PipelineConfig,
    th: &Thresholds,
    seed: u64,
) -> Result<(Partition, PartitionDiagnostics), StageError> {
    let n = ri.gprime.vertex_count();
    let t = th.parts;
    if t < 2 {
        return Err(StageError::Infeasible(format!("part count {t} is below 2")));
    }
    let t_value = u32::try_from(t).map_err(|_| StageError::Infeasible(format!("part count {t} too large")))?;
    let mut var = vec![usize::MAX; n];
    for (i, &v) in ri.hp.iter().enumerate() {
        var[v] = i;
    }
    let vars_of = |vs: &[Vertex]| -> Vec<usize> { vs.iter().map(|&u| var[u]).collect() };

    let mut w_index = vec![usize::MAX; n];
    let mut ws = Vec::new();
    for &w in &ri.lp {
        let s = ri.hp_neighbours(w);
        if s.len() > cfg.few_h_neighbours {
            continue;
        }
        let adjacent = s.iter().map(|&a| s.iter().map(|&b| ri.gprime.adjacent(a, b)).collect()).collect();
        let near = s.iter().map(|&a| s.iter().map(|&b| nearby.nearby(a, b)).collect()).collect();
        w_index[w] = ws.len();
        ws.push(WInfo { vars: vars_of(&s), adjacent, nearby: near });
    }

    let mut events = Vec::new();
    let mut kinds = Vec::new();
    for &v in &ri.lp {
        let s = ri.hp_neighbours(v);
        if s.len() >= cfg.few_h_neighbours {
            events.push(PartEvent::NoSingleton { scope: vars_of(&s) });
            kinds.push("A");
        }
    }
    let mut mu_events = Vec::new();
    for &v in &ri.hp {
        let b = vertex_bounds(ri, th, t, v);
        let own = var[v];
        let hn = ri.hp_neighbours(v);
        let mut scope = vars_of(&hn);
        scope.push(own);
        scope.sort_unstable();
        events.push(PartEvent::Degree { scope, own, nbrs: vars_of(&hn), bound: b.degree });
        kinds.push("B");

        let near = nearby.of(v);
        let mut scope = vars_of(near);
        scope.push(own);
        scope.sort_unstable();
        events.push(PartEvent::Nearby { scope, own, nbrs: vars_of(near), bound: b.nearby });
        kinds.push("C");

        let mut scope = vec![own];
        let mut terms = Vec::new();
        for w in small_lp_neighbours(ri, cfg, v) {
            let info = &ws[w_index[w]];
            scope.extend_from_slice(&info.vars);
            let counted: Vec<usize> = ri
                .hp_neighbours(w)
                .into_iter()
                .filter(|&z| z != v && !ri.gprime.adjacent(v, z))
                .map(|z| var[z])
                .collect();
            terms.push((w_index[w], counted));
        }
        scope.sort_unstable();
        scope.dedup();
        mu_events.push((scope, own, terms, b.mu));
    }
    for (scope, own, terms, bound) in mu_events {
        events.push(PartEvent::Mu { scope, own, terms, ws: &ws, bound });
        kinds.push("D");
    }

    let space = VariableSpace::uniform(ri.hp.len(), t_value);
    let (values, log) = run_resampler(space, &events, cfg.max_rounds_for(events.len()), seed);
    if !log.is_clean() {
        return Err(StageError::Timeout { stage: "partition_h", rounds: log.rounds });
    }
    let mut h = vec![None; n];
    for (i, &v) in ri.hp.iter().enumerate() {
        h[v] = Some(values[i] as usize);
    }
    let part = Partition::from_assignment(t, h)
        .verify(ri, nearby, cfg, th)
        .map_err(|problems| StageError::Verification { stage: "partition_h", details: problems.join("; ") })?;
    let diagnostics = partition_diagnostics(ri, nearby, cfg, &part, log.summarize(|id| kinds[id]));
    Ok((part, diagnostics))
}

fn own_part_counts(ri: &ReducedInstance<'_>, nearby: &NearbyIndex, part: &Partition, v: Vertex) -> (usize, usize) {
    let own = part.part_of(v);
    let degree = ri.hp_neighbours(v).into_iter().filter(|&u| part.part_of(u) == own).count();
    let near = nearby.of(v).iter().filter(|&&u| part.part_of(u) == own).count();
    (degree, near)
}

pub fn partition_diagnostics(
    ri: &ReducedInstance<'_>,
    nearby: &NearbyIndex,
    cfg: &PipelineConfig,
    part: &Partition,
    resampling: ResampleSummary,
) -> PartitionDiagnostics {
    let vertices = ri
        .hp
        .iter()
        .map(|&v| {
            let (own_part_degree, own_part_nearby) = own_part_counts(ri, nearby, part, v);
            VertexRecord {
                vertex: v,
                part: part.part_of(v).expect("H' vertex has a part"),
                own_part_degree,
                own_part_nearby,
                s_size: small_lp_neighbours(ri, cfg, v).len(),
                mu: compute_mu(v, part, ri, nearby, cfg),
            }
        })
        .collect();
    let dangerous = ri.lp.iter().copied().filter(|&w| is_dangerous(w, part, ri, nearby)).collect();
    PartitionDiagnostics { t: part.t, nearby_pairs: nearby.pair_count(), vertices, dangerous, resampling }
}

/// Direct re-check of the partition guarantees and of the nearby cap; one message per violation.
pub fn verify_partition(
    ri: &ReducedInstance<'_>,
    nearby: &NearbyIndex,
    cfg: &PipelineConfig,
    th: &Thresholds,
    part: &Partition,
) -> Vec<String> {
    let mut problems = Vec::new();
    for &v in &ri.hp {
        if part.part_of(v).is_none_or(|p| p >= part.t) {
            problems.push(format!("H' vertex {v} has no valid part"));
        }
    }
    if !problems.is_empty() {
        return problems;
    }
    for &v in &ri.lp {
        let s = ri.hp_neighbours(v);
        if s.len() < cfg.few_h_neighbours {
            continue;
        }
        let singleton = (0..part.t).any(|j| s.iter().filter(|&&u| part.part_of(u) == Some(j)).count() == 1);
        if !singleton {
            problems.push(format!("L' vertex {v} meets no part exactly once"));
        }
    }
    for &v in &ri.hp {
        let b = vertex_bounds(ri, th, part.t, v);
        let (degree, near) = own_part_counts(ri, nearby, part, v);
        if degree as f64 > b.degree {
            problems.push(format!("vertex {v}: own-part degree {degree} above {:.3}", b.degree));
        }
        if near as f64 > b.nearby {
            problems.push(format!("vertex {v}: own-part nearby count {near} above {:.3}", b.nearby));
        }
        let mu = compute_mu(v, part, ri, nearby, cfg);
        if mu as f64 > b.mu {
            problems.push(format!("vertex {v}: mu {mu} above {:.3}", b.mu));
        }
        let cap = cfg.few_h_neighbours as f64 * ri.lp_degree(v) as f64 / cfg.nearby_common as f64;
        if nearby.of(v).len() as f64 > cap {
            problems.push(format!("vertex {v}: {} nearby vertices above {cap:.3}", nearby.of(v).len()));
        }
    }
    problems
}
