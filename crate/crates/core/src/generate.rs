//! Seeded random graph generators. Every generator is a pure function of its arguments.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, Vertex};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; used to derive independent per-trial / per-stage seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Erdős–Rényi G(n, p): each unordered pair independently with probability `p`.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Graph {
    assert!((0.0..=1.0).contains(&p), "edge probability must lie in [0, 1]");
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edge_list(n, &edges)
}

/// Uniform-ish random `d`-regular graph by repeated random pairing of half-edges.
/// Returns `None` when `n * d` is odd, `d >= n`, or no simple pairing was found.
pub fn gen_regular(n: usize, d: usize, seed: u64) -> Option<Graph> {
    if (n * d) % 2 == 1 || (d >= n && n > 0) {
        return None;
    }
    let mut rng = rng_from_seed(seed);
    'attempt: for _ in 0..1000 {
        let mut points: Vec<Vertex> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut adj = vec![Vec::<Vertex>::with_capacity(d); n];
        let mut edges = Vec::with_capacity(n * d / 2);
        while !points.is_empty() {
            // try a bounded number of random pairs before restarting
            let mut placed = false;
            for _ in 0..100 {
                let i = rng.gen_range(0..points.len());
                let j = rng.gen_range(0..points.len());
                let (u, v) = (points[i], points[j]);
                if i == j || u == v || adj[u].contains(&v) {
                    continue;
                }
                adj[u].push(v);
                adj[v].push(u);
                edges.push((u, v));
                let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                points.swap_remove(hi);
                points.swap_remove(lo);
                placed = true;
                break;
            }
            if !placed {
                continue 'attempt;
            }
        }
        return Some(Graph::from_edge_list(n, &edges));
    }
    None
}

/// Hub-and-satellite family: `hubs` vertices forming G(hubs, p_hub), plus `satellites`
/// vertices each joined to a uniformly random set of `min_links..=max_links` hubs.
/// Exercises the low/high degree interplay that plain G(n, p) rarely produces.
pub fn gen_satellite(
    hubs: usize,
    p_hub: f64,
    satellites: usize,
    min_links: usize,
    max_links: usize,
    seed: u64,
) -> Graph {
    assert!(min_links <= max_links && max_links <= hubs);
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..hubs {
        for v in u + 1..hubs {
            if rng.gen::<f64>() < p_hub {
                edges.push((u, v));
            }
        }
    }
    let hub_ids: Vec<Vertex> = (0..hubs).collect();
    for s in 0..satellites {
        let k = rng.gen_range(min_links..=max_links);
        for &h in hub_ids.choose_multiple(&mut rng, k) {
            edges.push((hubs + s, h));
        }
    }
    Graph::from_edge_list(hubs + satellites, &edges)
}
