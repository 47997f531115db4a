#![allow(dead_code)]

use std::collections::BTreeSet;

use partition_oracle::diffusion::{truncated_trajectory, Mass, Truncation};
use partition_oracle::graph::{
    gen_bridged_cycles, gen_cycle, gen_grid, gen_path, gen_random_tree, gen_triangulated_grid,
};
use partition_oracle::{BoundedDegreeGraph, OracleParams, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub name: String,
    pub graph: BoundedDegreeGraph,
    pub seed: u64,
}

fn case(name: &str, graph: BoundedDegreeGraph, seed: u64) -> Case {
    Case { name: format!("{name}/seed{seed}"), graph, seed }
}

/// Graph/seed pairs covering every generator family, `1 <= n <= 200`.
pub fn corpus() -> Vec<Case> {
    let mut out = vec![
        case("single", gen_path(1).unwrap(), 1),
        case("edge", gen_path(2).unwrap(), 2),
        case("path30", gen_path(30).unwrap(), 3),
        case("cycle40", gen_cycle(40).unwrap(), 4),
        case("bridge4", gen_bridged_cycles(4).unwrap(), 42),
        case("bridge4", gen_bridged_cycles(4).unwrap(), 7),
        case("bridge8", gen_bridged_cycles(8).unwrap(), 5),
        case("bridge25", gen_bridged_cycles(25).unwrap(), 6),
        case("grid2x2", gen_grid(2, 2).unwrap(), 8),
        case("grid5x6", gen_grid(5, 6).unwrap(), 9),
        case("grid8x8", gen_grid(8, 8).unwrap(), 10),
        case("grid8x8", gen_grid(8, 8).unwrap(), 11),
        case("grid10x12", gen_grid(10, 12).unwrap(), 12),
        case("grid14x14", gen_grid(14, 14).unwrap(), 13),
        case("grid10x20", gen_grid(10, 20).unwrap(), 14),
        case("tri3x3", gen_triangulated_grid(3, 3).unwrap(), 15),
        case("tri6x6", gen_triangulated_grid(6, 6).unwrap(), 16),
        case("tri8x8", gen_triangulated_grid(8, 8).unwrap(), 17),
        case("tri10x14", gen_triangulated_grid(10, 14).unwrap(), 18),
        case("tri14x14", gen_triangulated_grid(14, 14).unwrap(), 19),
    ];
    for (i, (n, d)) in [(20, 3), (50, 3), (64, 4), (100, 3), (150, 4), (200, 3)].into_iter().enumerate() {
        let seed = 100 + i as u64;
        out.push(case(&format!("tree{n}d{d}"), gen_random_tree(n, d, seed).unwrap(), seed));
    }
    out.push(case("tree200d5", gen_random_tree(200, 5, 77).unwrap(), 78));
    out
}

/// The acceptance parameter set.
pub fn params(d: usize) -> OracleParams {
    OracleParams::explicit(0.1, d.max(2))
}

/// `{w : ∃t ≤ ℓ, v ∈ supp(M̂ᵗw)}` for every `v`, by running the diffusion
/// from every `w`.
pub fn brute_inverse_balls<M: Mass>(g: &BoundedDegreeGraph, ell: usize, rho: f64) -> Vec<VertexSet> {
    let n = g.num_vertices();
    let trunc = Truncation::<M>::new(rho);
    let mut balls: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for w in 0..n {
        for p in truncated_trajectory::<M>(g, w, ell, &trunc) {
            for (v, _) in p.iter() {
                balls[v].insert(w);
            }
        }
    }
    balls.into_iter().map(|b| b.into_iter().collect()).collect()
}

/// Random planar graph: each edge of a `rows × cols` triangulated grid is
/// kept with probability `keep`.
pub fn random_planar(rows: usize, cols: usize, keep: f64, seed: u64) -> BoundedDegreeGraph {
    let full = gen_triangulated_grid(rows, cols).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = full.edges().filter(|_| rng.random_bool(keep)).collect();
    BoundedDegreeGraph::from_edges(full.num_vertices(), full.degree_bound(), &edges).unwrap()
}

/// Cut edges of `set`, counted directly from adjacency.
pub fn brute_cut(g: &BoundedDegreeGraph, set: &VertexSet) -> usize {
    set.iter().flat_map(|u| g.neighbors(u).iter()).filter(|&&w| !set.contains(w)).count()
}
