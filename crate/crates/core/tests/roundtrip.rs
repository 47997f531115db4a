use partition_oracle::oracle::{Partition, PartitionExport};
use partition_oracle::{BoundedDegreeGraph, OracleParams, VertexSet};
use proptest::prelude::*;

fn arb_graph() -> impl Strategy<Value = BoundedDegreeGraph> {
    (1usize..40, 2usize..6, prop::collection::vec((0usize..40, 0usize..40), 0..120)).prop_map(|(n, d, pairs)| {
        let mut edges = Vec::new();
        let mut deg = vec![0usize; n];
        for (u, v) in pairs {
            let (u, v) = (u % n, v % n);
            if u == v || deg[u] == d || deg[v] == d || edges.contains(&(u.min(v), u.max(v))) {
                continue;
            }
            deg[u] += 1;
            deg[v] += 1;
            edges.push((u.min(v), u.max(v)));
        }
        BoundedDegreeGraph::from_edges(n, d, &edges).unwrap()
    })
}

proptest! {
    #[test]
    fn edge_list_round_trips(g in arb_graph()) {
        let back = BoundedDegreeGraph::parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn vertex_sets_are_sorted_and_distinct(ids in prop::collection::vec(0usize..100, 0..50)) {
        let s: VertexSet = ids.iter().copied().collect();
        prop_assert!(s.as_slice().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(ids.iter().all(|&v| s.contains(v)));
    }

    #[test]
    fn partition_export_round_trips(g in arb_graph(), seed in any::<u64>()) {
        let n = g.num_vertices();
        let anchors: Vec<usize> = (0..n).map(|v| v - v % 3).collect();
        let part = Partition::from_anchors(anchors);
        let export = PartitionExport::new(&g, seed, &OracleParams::explicit(0.1, g.degree_bound().max(2)), &part);
        let json = serde_json::to_string(&export).unwrap();
        let back: PartitionExport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, export);
    }

    #[test]
    fn pieces_partition_the_vertex_set(g in arb_graph()) {
        let n = g.num_vertices();
        let part = Partition::from_anchors((0..n).map(|v| v / 4 * 4).collect());
        let pieces = part.pieces(&g);
        let mut seen = vec![false; n];
        for p in &pieces {
            for v in p.iter() {
                prop_assert!(!seen[v]);
                seen[v] = true;
                prop_assert_eq!(&part.piece_of(&g, v), p);
            }
        }
        prop_assert!(seen.into_iter().all(|x| x));
    }
}
