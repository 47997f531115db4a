mod common;

use partition_oracle::diffusion::{truncated_diffusion, truncated_trajectory, Exact, Truncation};
use partition_oracle::graph::{gen_grid, gen_random_tree, gen_triangulated_grid};
use partition_oracle::oracle::cluster;
use partition_oracle::{BoundedDegreeGraph, OracleParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graphs() -> Vec<BoundedDegreeGraph> {
    let mut out = vec![
        gen_grid(9, 9).unwrap(),
        gen_triangulated_grid(7, 8).unwrap(),
        gen_random_tree(80, 3, 5).unwrap(),
        gen_random_tree(120, 4, 6).unwrap(),
    ];
    out.extend((0..6).map(|i| common::random_planar(8, 9, 0.75, 40 + i)));
    out
}

#[test]
fn random_cluster_calls_meet_the_contract() {
    let gs = graphs();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut non_singletons = 0;
    for call in 0..1000 {
        let g = &gs[rng.random_range(0..gs.len())];
        let n = g.num_vertices();
        let mut p = OracleParams::explicit(0.1, g.degree_bound().max(2));
        p.phi = [0.1, 0.2, 0.3][rng.random_range(0..3)];
        p.rho = [1e-2, 3e-3, 1e-3][rng.random_range(0..3)];
        let v = rng.random_range(0..n);
        let t = rng.random_range(1..=p.ell);
        let k = rng.random_range(1..=40);
        let c = cluster::<f64>(g, &p, v, t, k);
        assert!(c.contains(v), "call {call}");
        if c.len() == 1 {
            continue;
        }
        non_singletons += 1;
        let supp = truncated_diffusion::<f64>(g, v, t, p.rho).support();
        let size = c.len();
        assert!((k..=2 * k).contains(&size), "call {call}: |C| = {size}, k = {k}");
        assert!(c.is_subset(&supp), "call {call}: cluster leaves the support");
        // Φ(C) ≤ φ, decided on integers: cut ≤ φ · 2 min(|C|, n−|C|) d.
        let denom = 2 * size.min(n - size) * g.degree_bound();
        let cut = common::brute_cut(g, &c);
        assert!(cut as f64 <= p.phi * denom as f64 + 1e-9, "call {call}: cut {cut} / {denom} > {}", p.phi);
    }
    assert!(non_singletons >= 100, "only {non_singletons} non-singleton clusters; the sweep is too easy");
}

#[test]
fn truncated_supports_never_exceed_inverse_rho() {
    for g in graphs() {
        for rho in [0.05f64, 1e-2, 1e-3] {
            let cap = (1.0 / rho).floor() as usize;
            let trunc = Truncation::<f64>::new(rho);
            for v in (0..g.num_vertices()).step_by(7) {
                for p in truncated_trajectory::<f64>(&g, v, 20, &trunc) {
                    assert!(p.support_len() <= cap, "support {} > {cap}", p.support_len());
                }
            }
        }
    }
}

#[test]
fn exact_and_float_supports_agree_away_from_the_boundary() {
    let g = gen_grid(6, 6).unwrap();
    for v in [0, 7, 21, 35] {
        for t in [1, 4, 9] {
            let a = truncated_diffusion::<f64>(&g, v, t, 0.013).support();
            let b = truncated_diffusion::<Exact>(&g, v, t, 0.013).support();
            assert_eq!(a, b, "v={v} t={t}");
        }
    }
}
