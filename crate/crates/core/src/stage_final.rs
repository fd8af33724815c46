//! G'' and the per-part colouring, assembly of the three partial colourings, and the
//! end-to-end pipeline with its greedy fallback.

use serde::Serialize;

use crate::baselines::{ascending_order, greedy_pcf};
use crate::colouring::{Colour, Colouring, ColouringFile, Palette};
use crate::config::{Mode, PipelineConfig, Thresholds};
use crate::error::{ConfigError, StageError};
use crate::generate::mix_seed;
use crate::graph::{Adjacency, Graph, GraphOverlay, Vertex};
use crate::stage_low::{colour_low, split_lh, LowColouring, LowDiagnostics};
use crate::stage_mid::{colour_mid, compute_nstar, sample_y, MidDiagnostics, MidResult};
use crate::stage_partition::{
    build_nearby, is_dangerous, partition_h, small_lp_neighbours, vertex_bounds, NearbyIndex, Partition,
    PartitionDiagnostics,
};
use crate::stage_reduce::{build_reduced, verify_reduced, ReduceDiagnostics, ReducedInstance};
use crate::verify::{check_pcf, has_unique_colour, ViolationReport};

#[derive(Clone, Debug, Serialize)]
pub struct PartDegree {
    pub part: usize,
    pub size: usize,
    pub max_degree: usize,
    /// max over members of ⌊degree bound + nearby bound + μ bound⌋
    pub bound: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GppDiagnostics {
    pub nearby_edges: usize,
    pub dangerous_edges: usize,
    pub parts: Vec<PartDegree>,
    /// (Δ-cap)/t + 3·slack, the bound shared by every part
    pub uniform_bound: f64,
}

fn part_degree(g: &GraphOverlay<'_>, part: &Partition, v: Vertex) -> usize {
    let own = part.part_of(v);
    g.neighbours(v).filter(|&u| own.is_some() && part.part_of(u) == own).count()
}

/// G'' over G': within each part, joins nearby pairs and closes every dangerous w ∈ S_v.
pub fn build_gpp<'g>(
    ri: &ReducedInstance<'g>,
    part: &Partition,
    nearby: &NearbyIndex,
    cfg: &PipelineConfig,
    th: &Thresholds,
) -> Result<(GraphOverlay<'g>, GppDiagnostics), StageError> {
    if !part.is_verified() {
        return Err(StageError::Verification {
            stage: "build_gpp",
            details: "partition has not passed verification".into(),
        });
    }
    let n = ri.gprime.vertex_count();
    let mut gpp = ri.gprime.clone();
    let mut dangerous = vec![false; n];
    for &w in &ri.lp {
        dangerous[w] = is_dangerous(w, part, ri, nearby);
    }
    let (mut nearby_edges, mut dangerous_edges) = (0, 0);
    for &v in &ri.hp {
        let own = part.part_of(v);
        for &u in nearby.of(v) {
            if part.part_of(u) == own && gpp.add_edge(v, u).expect("H' pair") {
                nearby_edges += 1;
            }
        }
        for w in small_lp_neighbours(ri, cfg, v) {
            if !dangerous[w] {
                continue;
            }
            for z in ri.hp_neighbours(w) {
                if z != v
                    && !ri.gprime.adjacent(v, z)
                    && part.part_of(z) == own
                    && gpp.add_edge(v, z).expect("H' pair")
                {
                    dangerous_edges += 1;
                }
            }
        }
    }
    let mut parts = Vec::with_capacity(part.t);
    for (j, members) in part.parts.iter().enumerate() {
        let max_degree = members.iter().map(|&v| part_degree(&gpp, part, v)).max().unwrap_or(0);
        let bound = members
            .iter()
            .map(|&v| {
                let b = vertex_bounds(ri, th, part.t, v);
                (b.degree + b.nearby + b.mu).floor().max(0.0) as usize
            })
            .max()
            .unwrap_or(0);
        parts.push(PartDegree { part: j, size: members.len(), max_degree, bound });
    }
    let uniform_bound = th.hprime_degree_cap / part.t as f64 + 3.0 * th.slack;
    Ok((gpp, GppDiagnostics { nearby_edges, dangerous_edges, parts, uniform_bound }))
}

/// Per-vertex and per-part checks of the G'' part degrees against the partition bounds.
pub fn verify_gpp(gpp: &GraphOverlay<'_>, d: &GppDiagnostics) -> Vec<String> {
    let mut problems = Vec::new();
    for p in &d.parts {
        if p.max_degree > p.bound {
            problems.push(format!("part {}: G'' degree {} above {}", p.part, p.max_degree, p.bound));
        }
        if p.max_degree as f64 > d.uniform_bound {
            problems.push(format!("part {}: G'' degree {} above {:.3}", p.part, p.max_degree, d.uniform_bound));
        }
    }
    for (u, v) in gpp.extra_edges() {
        if gpp.base().adjacent(u, v) {
            problems.push(format!("overlay repeats base edge {u}-{v}"));
        }
    }
    problems
}

/// Smallest-free greedy on each G''[H_j] in ascending id order. Part j gets the palette
/// "part-j" of Δ(G''[H_j]) + 1 ids starting where the previous non-empty part ended.
pub fn colour_parts(gpp: &GraphOverlay<'_>, part: &Partition, base: Colour) -> Colouring {
    let n = gpp.vertex_count();
    let mut colouring = Colouring::new(n);
    let mut next = base;
    let mut forbidden = Vec::new();
    for (j, members) in part.parts.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let delta_j = members.iter().map(|&v| part_degree(gpp, part, v)).max().unwrap_or(0);
        let size = delta_j as Colour + 1;
        colouring
            .add_palette(Palette::new(format!("part-{j}"), next, next + size - 1))
            .expect("part palettes are laid out disjointly");
        for &v in members {
            forbidden.clear();
            forbidden.extend(gpp.neighbours(v).filter(|&u| part.part_of(u) == Some(j)).filter_map(|u| colouring.get(u)));
            forbidden.sort_unstable();
            forbidden.dedup();
            let mut c = next;
            for &f in &forbidden {
                if f == c {
                    c += 1;
                } else if f > c {
                    break;
                }
            }
            colouring.set(v, c);
        }
        next += size;
    }
    colouring
}

#[derive(Clone, Debug, Serialize)]
pub struct AssembleDiagnostics {
    pub repaired: usize,
    /// L' vertices whose G'-neighbourhood in H' has no colour of multiplicity one
    pub lp_unsatisfied: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("assembled colouring is not proper conflict-free: {report:?}")]
pub struct PcfViolation {
    pub report: ViolationReport,
}

/// Union of the low, mid and part colourings on disjoint palettes: low ids first, then the mid
/// palette, then the part palettes already laid out by [`colour_parts`].
pub fn assemble(
    g: &Graph,
    low: &LowColouring,
    mid: &MidResult,
    parts: &Colouring,
) -> Result<(Colouring, AssembleDiagnostics), PcfViolation> {
    let n = g.vertex_count();
    let low_size = low.palette_size as Colour;
    let mid_size = mid.palette_size as Colour;
    let mut c = Colouring::new(n);
    let palettes = [Palette::new("low", 0, low_size - 1), Palette::new("mid", low_size, low_size + mid_size - 1)];
    for p in palettes.into_iter().chain(parts.palettes().iter().cloned()) {
        if p.size() > 0 {
            c.add_palette(p).map_err(|_| PcfViolation { report: ViolationReport::default() })?;
        }
    }
    for v in 0..n {
        if let Some(x) = low.colours[v] {
            c.set(v, x);
        } else if let Some(x) = mid.f_mid[v] {
            c.set(v, low_size + x);
        } else if let Some(x) = parts.get(v) {
            c.set(v, x);
        }
    }
    let mut repaired = 0;
    for v in 0..n {
        if c.get(v).is_none() {
            let used: Vec<Colour> = g.neighbours(v).filter_map(|u| c.get(u)).collect();
            if let Some(x) = (0..low_size).find(|x| !used.contains(x)) {
                c.set(v, x);
                repaired += 1;
            }
        }
    }
    let report = check_pcf(g, &c);
    if !report.is_empty() {
        return Err(PcfViolation { report });
    }
    Ok((c, AssembleDiagnostics { repaired, lp_unsatisfied: Vec::new() }))
}

/// L' vertices w for which no colour appears exactly once on N_{G'}(w) ∩ H'.
pub fn lp_unsatisfied(ri: &ReducedInstance<'_>, c: &Colouring) -> Vec<Vertex> {
    ri.lp
        .iter()
        .copied()
        .filter(|&w| {
            let mut seen: Vec<Colour> = ri.hp_neighbours(w).into_iter().filter_map(|u| c.get(u)).collect();
            !has_unique_colour(&mut seen)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    None,
    GreedyPcf,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StageLogs {
    pub low: Option<LowDiagnostics>,
    pub mid: Option<MidDiagnostics>,
    pub reduce: Option<ReduceDiagnostics>,
    pub partition: Option<PartitionDiagnostics>,
    pub gpp: Option<GppDiagnostics>,
    pub assemble: Option<AssembleDiagnostics>,
    /// Why the pipeline fell back, if it did.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineResult {
    #[serde(serialize_with = "serialize_colouring")]
    pub colouring: Colouring,
    pub colours_used: usize,
    pub stage_logs: StageLogs,
    pub fallback: Fallback,
    pub mode: Mode,
}

fn serialize_colouring<S: serde::Serializer>(c: &Colouring, s: S) -> Result<S::Ok, S::Error> {
    let file: ColouringFile = c.to_file();
    file.serialize(s)
}

/// Runs every stage; any timeout, failed re-check or infeasible configuration routes to the
/// greedy PCF colouring. Errors only when the configuration itself is unusable.
pub fn run_pipeline(g: &Graph, cfg: &PipelineConfig, seed: u64) -> Result<PipelineResult, ConfigError> {
    let th = cfg.thresholds()?;
    let split = split_lh(g, cfg.delta, &th)?;
    let mut logs = StageLogs::default();
    let outcome = if th.is_feasible() {
        run_stages(g, cfg, &th, &split, seed, &mut logs)
    } else {
        Err(StageError::Infeasible(th.infeasible.join("; ")))
    };
    let (colouring, fallback) = match outcome {
        Ok(c) => (c, Fallback::None),
        Err(e) => {
            logs.failure = Some(e.to_string());
            let c = greedy_pcf(g, &ascending_order(g)).expect("ascending order is a permutation");
            (c, Fallback::GreedyPcf)
        }
    };
    Ok(PipelineResult {
        colours_used: colouring.distinct_colours(),
        colouring,
        stage_logs: logs,
        fallback,
        mode: cfg.mode,
    })
}

fn run_stages(
    g: &Graph,
    cfg: &PipelineConfig,
    th: &Thresholds,
    split: &crate::stage_low::DegreeSplit,
    seed: u64,
    logs: &mut StageLogs,
) -> Result<Colouring, StageError> {
    let low = colour_low(g, split, th);
    logs.low = Some(low.diagnostics(split));

    let nstar = compute_nstar(g, split, cfg.small_deg);
    let sample = sample_y(g, split, &nstar, cfg, th, mix_seed(seed, 1))?;
    let mid = colour_mid(g, split, &nstar, &sample, cfg, th, mix_seed(seed, 2))?;
    logs.mid = Some(mid.diagnostics.clone());

    let ri = build_reduced(g, split, &mid, cfg, th);
    logs.reduce = Some(ri.diagnostics.clone());
    let problems = verify_reduced(g, split, &mid, cfg, th, &ri);
    if !problems.is_empty() {
        return Err(StageError::Verification { stage: "build_reduced", details: problems.join("; ") });
    }

    let nearby = build_nearby(&ri, cfg);
    let (part, pd) = partition_h(&ri, &nearby, cfg, th, mix_seed(seed, 3))?;
    logs.partition = Some(pd);
    let (gpp, gd) = build_gpp(&ri, &part, &nearby, cfg, th)?;
    let problems = verify_gpp(&gpp, &gd);
    logs.gpp = Some(gd);
    if !problems.is_empty() {
        return Err(StageError::Verification { stage: "build_gpp", details: problems.join("; ") });
    }

    let base = (low.palette_size + mid.palette_size) as Colour;
    let parts = colour_parts(&gpp, &part, base);
    let (colouring, mut ad) = assemble(g, &low, &mid, &parts)
        .map_err(|e| StageError::Verification { stage: "assemble", details: e.to_string() })?;
    ad.lp_unsatisfied = lp_unsatisfied(&ri, &colouring);
    let unsatisfied = ad.lp_unsatisfied.len();
    logs.assemble = Some(ad);
    if unsatisfied > 0 {
        return Err(StageError::Verification {
            stage: "assemble",
            details: format!("{unsatisfied} L' vertices without a unique colour in N_G'(w)"),
        });
    }
    Ok(colouring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_gnp;

    #[test]
    fn edgeless_graph_uses_one_colour() {
        let g = Graph::empty(6);
        let r = run_pipeline(&g, &PipelineConfig::desk(0), 1).unwrap();
        assert_eq!(r.colours_used, 1);
        assert!(check_pcf(&g, &r.colouring).is_empty());
    }

    #[test]
    fn c5_passes_whatever_path_runs() {
        let g = Graph::cycle(5);
        for cfg in [PipelineConfig::paper(2), PipelineConfig::desk(2)] {
            let r = run_pipeline(&g, &cfg, 4).unwrap();
            assert!(check_pcf(&g, &r.colouring).is_empty());
        }
    }

    #[test]
    fn paper_mode_falls_back_with_a_reason() {
        let g = gen_gnp(60, 0.1, 2);
        let r = run_pipeline(&g, &PipelineConfig::paper(g.max_degree()), 1).unwrap();
        assert_eq!(r.fallback, Fallback::GreedyPcf);
        assert!(r.stage_logs.failure.as_deref().unwrap().contains("exceeds 1"));
    }

    #[test]
    fn desk_gnp_runs_clean() {
        let g = gen_gnp(500, 0.1, 11);
        let r = run_pipeline(&g, &PipelineConfig::desk(g.max_degree()), 11).unwrap();
        assert!(check_pcf(&g, &r.colouring).is_empty());
        assert_eq!(r.fallback, Fallback::None, "{:?}", r.stage_logs.failure);
    }

    #[test]
    fn corrupted_part_colour_is_caught() {
        let g = Graph::complete(2);
        let cfg = PipelineConfig::desk(1);
        let th = cfg.thresholds().unwrap();
        let low = LowColouring { colours: vec![None, None], ell: vec![None, None], palette_size: th.low_palette_size };
        let mid = MidResult::empty(2, 1);
        let mut parts = Colouring::new(2);
        parts.add_palette(Palette::new("part-0", 10, 11)).unwrap();
        parts.set(0, 10);
        parts.set(1, 11);
        assert!(assemble(&g, &low, &mid, &parts).is_ok());
        parts.set(1, 10);
        assert!(assemble(&g, &low, &mid, &parts).is_err());
    }
}
