mod common;

use partition_oracle::applications::solvers::{
    is_bipartite, is_triangle_free, max_independent_set, max_matching, min_dominating_set, min_vertex_cover,
};
use partition_oracle::BoundedDegreeGraph;

fn subsets(g: &BoundedDegreeGraph) -> impl Iterator<Item = u32> {
    0..(1u32 << g.num_vertices())
}

fn covers(g: &BoundedDegreeGraph, s: u32) -> bool {
    g.edges().all(|(u, v)| s >> u & 1 == 1 || s >> v & 1 == 1)
}

fn independent(g: &BoundedDegreeGraph, s: u32) -> bool {
    g.edges().all(|(u, v)| s >> u & 1 == 0 || s >> v & 1 == 0)
}

fn dominates(g: &BoundedDegreeGraph, s: u32) -> bool {
    (0..g.num_vertices()).all(|v| s >> v & 1 == 1 || g.neighbors(v).iter().any(|&w| s >> w & 1 == 1))
}

fn brute_matching(edges: &[(usize, usize)], used: u32) -> usize {
    let Some((i, &(u, v))) = edges.iter().enumerate().find(|(_, &(u, v))| used >> u & 1 == 0 && used >> v & 1 == 0)
    else {
        return 0;
    };
    let rest = &edges[i + 1..];
    let take = 1 + brute_matching(rest, used | 1 << u | 1 << v);
    take.max(brute_matching(rest, used))
}

fn brute_odd_cycle(g: &BoundedDegreeGraph) -> bool {
    // Bipartite iff some 2-colouring (as a vertex subset) splits every edge.
    !subsets(g).any(|s| g.edges().all(|(u, v)| (s >> u & 1) != (s >> v & 1)))
}

#[test]
fn exact_solvers_match_exhaustive_enumeration() {
    for seed in 0..40 {
        let g = common::random_planar(3, 4, 0.55 + 0.01 * seed as f64, seed);
        assert_eq!(g.num_vertices(), 12);
        let sizes = |pred: fn(&BoundedDegreeGraph, u32) -> bool| -> Vec<usize> {
            subsets(&g).filter(|&s| pred(&g, s)).map(|s| s.count_ones() as usize).collect()
        };
        let vc = *sizes(covers).iter().min().unwrap();
        let is = *sizes(independent).iter().max().unwrap();
        let ds = *sizes(dominates).iter().min().unwrap();
        let edges: Vec<_> = g.edges().collect();
        let mm = brute_matching(&edges, 0);
        assert_eq!(min_vertex_cover(&g).unwrap(), vc, "seed {seed}");
        assert_eq!(max_independent_set(&g).unwrap(), is, "seed {seed}");
        assert_eq!(min_dominating_set(&g).unwrap(), ds, "seed {seed}");
        assert_eq!(max_matching(&g), mm, "seed {seed}");
        assert_eq!(is_bipartite(&g), !brute_odd_cycle(&g), "seed {seed}");
        let brute_triangle =
            (0..12).any(|a| g.neighbors(a).iter().any(|&b| g.neighbors(b).iter().any(|&c| c != a && g.has_edge(a, c))));
        assert_eq!(is_triangle_free(&g), !brute_triangle, "seed {seed}");
        // Duality sandwich.
        assert!(mm <= vc);
        assert_eq!(is + vc, 12);
    }
}
