//! Hand-built gadgets for the reduction, partition and G'' stages.

use pcf_core::config::{PipelineConfig, Thresholds};
use pcf_core::graph::{Adjacency, Graph, Vertex};
use pcf_core::stage_final::{build_gpp, colour_parts, verify_gpp};
use pcf_core::stage_low::{split_lh, DegreeSplit};
use pcf_core::stage_mid::MidResult;
use pcf_core::stage_partition::{build_nearby, compute_mu, is_dangerous, verify_partition, Partition};
use pcf_core::stage_reduce::{build_reduced, verify_reduced, ReducedInstance};

struct Fixture {
    g: Graph,
    cfg: PipelineConfig,
    th: Thresholds,
    split: DegreeSplit,
    mid: MidResult,
}

impl Fixture {
    /// Scaled config with τ_L = `tau`, merging disabled and a generous slack.
    fn new(g: Graph, tau: f64, parts: usize) -> Self {
        let mut cfg = PipelineConfig::scaled(g.max_degree(), tau, 1e9, 0.5, 0.0, 1e9, 4, parts, 10.0);
        cfg.few_h_neighbours = 50;
        cfg.nearby_common = 100;
        let th = cfg.thresholds().unwrap();
        let split = split_lh(&g, cfg.delta, &th).unwrap();
        let mid = MidResult::empty(g.vertex_count(), 1);
        Fixture { g, cfg, th, split, mid }
    }

    fn reduced(&self) -> ReducedInstance<'_> {
        let ri = build_reduced(&self.g, &self.split, &self.mid, &self.cfg, &self.th);
        let problems = verify_reduced(&self.g, &self.split, &self.mid, &self.cfg, &self.th, &ri);
        assert!(problems.is_empty(), "{problems:?}");
        ri
    }
}

/// Hubs `0..hubs` each joined to a private block of `pad` pendant-free filler vertices (a K_pad)
/// so they land in H; the L gadget vertices are `hubs..hubs + extra_n`.
fn with_padding(hubs: usize, pad: usize, extra: &[(Vertex, Vertex)], extra_n: usize) -> Graph {
    let base = hubs + extra_n;
    let mut edges = extra.to_vec();
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

/// Hubs 0 and 1 share `shared` L-neighbours; each L vertex also sees one of hubs 2, 3, 4 so that
/// its H'-neighbourhood is an independent triple and survives the reduction.
fn nearby_gadget(shared: usize) -> Fixture {
    let hubs = 5;
    let mut edges = Vec::new();
    for i in 0..shared {
        let w = hubs + i;
        edges.extend([(w, 0), (w, 1), (w, 2 + i % 3)]);
    }
    Fixture::new(Graph::from_edge_list(hubs + shared, &edges), 3.0, 2)
}

#[test]
fn nearby_needs_the_full_common_count() {
    let f = nearby_gadget(100);
    let ri = f.reduced();
    assert_eq!(ri.lp.len(), 100);
    let nearby = build_nearby(&ri, &f.cfg);
    assert!(nearby.nearby(0, 1) && nearby.nearby(1, 0));
    assert_eq!(nearby.pair_count(), 1);

    let f = nearby_gadget(99);
    let ri = f.reduced();
    let nearby = build_nearby(&ri, &f.cfg);
    assert!(!nearby.nearby(0, 1));
    assert_eq!(nearby.pair_count(), 0);
}

/// L vertex 4 (and optionally 5) sees the four pairwise non-adjacent hubs 0..4.
fn four_hub_gadget(copies: usize) -> Fixture {
    let mut extra = Vec::new();
    for c in 0..copies {
        extra.extend((0..4).map(|h| (4 + c, h)));
    }
    Fixture::new(with_padding(4, 6, &extra, copies), 4.0, 3)
}

#[test]
fn dangerous_gadgets() {
    let f = four_hub_gadget(1);
    let ri = f.reduced();
    assert_eq!(ri.lp, vec![4]);
    let nearby = build_nearby(&ri, &f.cfg);
    let n = f.g.vertex_count();
    let assign = |parts: [usize; 4]| {
        let mut h = vec![None; n];
        for &v in &ri.hp {
            h[v] = Some(if v < 4 { parts[v] } else { 2 });
        }
        Partition::from_assignment(3, h)
    };
    // every hub has a same-part partner and a third vertex in a doubly-used part
    assert!(is_dangerous(4, &assign([0, 0, 1, 1]), &ri, &nearby));
    // hub 3 is alone in its part, and hub 2 has no partner
    assert!(!is_dangerous(4, &assign([0, 0, 1, 2]), &ri, &nearby));
    assert!(!is_dangerous(4, &assign([0, 1, 2, 2]), &ri, &nearby));
    // three in one part, the fourth alone: the lone hub has no partner
    assert!(!is_dangerous(4, &assign([0, 0, 0, 1]), &ri, &nearby));
    // all four together: each has partners and a third vertex in the shared part
    assert!(is_dangerous(4, &assign([0, 0, 0, 0]), &ri, &nearby));
}

#[test]
fn mu_counts_same_part_non_neighbours_over_dangerous_witnesses() {
    for copies in [1, 2] {
        let f = four_hub_gadget(copies);
        let ri = f.reduced();
        let nearby = build_nearby(&ri, &f.cfg);
        let mut h = vec![None; f.g.vertex_count()];
        for &v in &ri.hp {
            h[v] = Some(if v < 4 { [0, 0, 1, 1][v] } else { 2 });
        }
        let part = Partition::from_assignment(3, h);
        for v in 0..4 {
            assert_eq!(compute_mu(v, &part, &ri, &nearby, &f.cfg), copies, "hub {v}");
        }
        // padding vertices are not adjacent to any L' vertex
        assert_eq!(compute_mu(8, &part, &ri, &nearby, &f.cfg), 0);
    }
}

#[test]
fn gpp_closes_dangerous_neighbourhoods_and_parts_are_coloured_apart() {
    let f = four_hub_gadget(1);
    let ri = f.reduced();
    let nearby = build_nearby(&ri, &f.cfg);
    let mut h = vec![None; f.g.vertex_count()];
    for &v in &ri.hp {
        h[v] = Some(if v < 4 { [0, 0, 1, 1][v] } else { 2 });
    }
    let unverified = Partition::from_assignment(3, h);
    assert!(build_gpp(&ri, &unverified, &nearby, &f.cfg, &f.th).is_err());
    assert!(verify_partition(&ri, &nearby, &f.cfg, &f.th, &unverified).is_empty());
    let part = unverified.verify(&ri, &nearby, &f.cfg, &f.th).unwrap();
    assert!(part.is_verified());

    let (gpp, diag) = build_gpp(&ri, &part, &nearby, &f.cfg, &f.th).unwrap();
    let extra: Vec<_> = gpp.extra_edges().collect();
    assert_eq!(extra, vec![(0, 1), (2, 3)]);
    assert_eq!((diag.nearby_edges, diag.dangerous_edges), (0, 2));
    assert!(verify_gpp(&gpp, &diag).is_empty());

    let c = colour_parts(&gpp, &part, 100);
    let names: Vec<_> = c.palettes().iter().map(|p| (p.name.clone(), p.lo, p.hi)).collect();
    // part 0 = {0, 1} joined: Δ = 1, two colours; part 1 = {2, 3} likewise; part 2 = the K_6
    // padding with Δ = 5, six colours
    assert_eq!(
        names,
        vec![("part-0".into(), 100, 101), ("part-1".into(), 102, 103), ("part-2".into(), 104, 109)]
    );
    assert_ne!(c.get(0), c.get(1));
    assert_ne!(c.get(2), c.get(3));
    // every colour on N(4) now appears there exactly once
    let mut seen: Vec<_> = (0..4).map(|v| c.get(v).unwrap()).collect();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), 4);
}

#[test]
fn partition_verification_rejects_missing_singleton() {
    // one L' vertex with 50 pairwise non-adjacent hubs: property 1 needs a part met exactly once
    let hubs = 50;
    let extra: Vec<_> = (0..hubs).map(|h| (hubs, h)).collect();
    let f = Fixture::new(with_padding(hubs, 52, &extra, 1), 50.0, 30);
    let ri = f.reduced();
    assert_eq!(ri.lp, vec![hubs]);
    let nearby = build_nearby(&ri, &f.cfg);
    let mut h = vec![None; f.g.vertex_count()];
    for &v in &ri.hp {
        h[v] = Some(if v < hubs { v / 2 } else { 29 });
    }
    let paired = Partition::from_assignment(30, h.clone());
    let problems = verify_partition(&ri, &nearby, &f.cfg, &f.th, &paired);
    assert!(problems.iter().any(|p| p.contains("meets no part exactly once")), "{problems:?}");
    assert!(paired.verify(&ri, &nearby, &f.cfg, &f.th).is_err());
    h[0] = Some(28);
    let fixed = Partition::from_assignment(30, h);
    let problems = verify_partition(&ri, &nearby, &f.cfg, &f.th, &fixed);
    assert!(!problems.iter().any(|p| p.contains("exactly once")), "{problems:?}");
}
