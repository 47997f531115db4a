//! Measurement harness: cut accounting, viability, leakiness and good-seed
//! censuses, and the local-versus-global differential audit.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::{
    prefix_cuts, truncated_diffusion, truncated_trajectory, Conductance, Mass, MassVector, Truncation,
};
use crate::graph::{BoundedDegreeGraph, VertexSet};
use crate::oracle::findr::{is_viable, phase_sample, select_threshold, KTally};
use crate::oracle::{ClusterScan, OracleParams, Partition, PartitionOracle, PhaseThresholds, SeedContext};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutReport {
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub cut_edges: usize,
    /// `cut_edges / (d n)`.
    pub cut_fraction: f64,
    pub piece_size_histogram: BTreeMap<usize, usize>,
    /// Share of vertices sitting in singleton pieces.
    pub singleton_fraction: f64,
    /// Probability that a uniform vertex and a uniform neighbor of it lie
    /// in different pieces (isolated vertices count as uncut).
    pub incident_cut_fraction: f64,
}

pub fn measure_cut(g: &BoundedDegreeGraph, partition: &Partition, epsilon: f64) -> CutReport {
    let n = g.num_vertices();
    let d = g.degree_bound();
    let cut_edges = partition.cut_edges(g);
    let hist = partition.piece_size_histogram(g);
    let singles = hist.get(&1).copied().unwrap_or(0);
    let incident: f64 = (0..n)
        .filter(|&u| g.degree(u) > 0)
        .map(|u| {
            let cut = g.neighbors(u).iter().filter(|&&w| partition.anchor(w) != partition.anchor(u)).count();
            cut as f64 / g.degree(u) as f64
        })
        .sum();
    let per_vertex = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
    CutReport {
        n,
        d,
        epsilon,
        cut_edges,
        cut_fraction: if n == 0 { 0.0 } else { cut_edges as f64 / (d * n) as f64 },
        piece_size_histogram: hist,
        singleton_fraction: per_vertex(singles as f64),
        incident_cut_fraction: per_vertex(incident),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViabilityRow {
    pub s: usize,
    pub k: usize,
    pub cluster_size: usize,
    pub free_overlap: usize,
    pub viable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViabilityReport {
    pub h: usize,
    /// Seed multiset examined (draw order, repeats kept).
    pub seeds: Vec<usize>,
    /// Marks for each distinct seed and candidate.
    pub rows: Vec<ViabilityRow>,
    /// Per-candidate tallies over the seed multiset.
    pub tallies: Vec<KTally>,
    pub quota: f64,
    /// Threshold the finder's selection rule picks from these counts.
    pub selected: usize,
    /// Candidate with the most viable seeds (ties to the larger `k`), if any.
    pub argmax: Option<usize>,
}

/// Which seeds a viability census examines.
#[derive(Clone, Debug)]
pub enum CensusSeeds {
    /// The threshold finder's own kept sample for the phase.
    FinderSample,
    /// Every vertex of phase at least `h`.
    AllActive,
    Given(Vec<usize>),
}

/// Marks `(h, k)`-viability for each seed against an explicit free set `free`.
pub fn viability_census<M: Mass>(
    g: &BoundedDegreeGraph,
    ctx: &SeedContext,
    h: usize,
    free: &VertexSet,
    k_range: &[usize],
    seeds: CensusSeeds,
) -> ViabilityReport {
    let p = ctx.params();
    let n = g.num_vertices();
    let seeds = match seeds {
        CensusSeeds::FinderSample => phase_sample(ctx, n, h).0,
        CensusSeeds::AllActive => (0..n).filter(|&v| ctx.phase_of(v) >= h).collect(),
        CensusSeeds::Given(s) => s,
    };
    let mut distinct = seeds.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let rows: Vec<ViabilityRow> = distinct
        .par_iter()
        .flat_map_iter(|&s| {
            let vec = truncated_diffusion::<M>(g, s, ctx.walk_len_of(s), p.rho);
            let scan = ClusterScan::new(g, &vec, s, p.phi);
            k_range
                .iter()
                .map(|&k| {
                    let c = scan.cluster(k);
                    let overlap = c.intersection_count(free);
                    ViabilityRow {
                        s,
                        k,
                        cluster_size: c.len(),
                        free_overlap: overlap,
                        viable: is_viable(p, &c, overlap, k),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut row_at: BTreeMap<(usize, usize), &ViabilityRow> = BTreeMap::new();
    for r in &rows {
        row_at.insert((r.s, r.k), r);
    }
    let tallies: Vec<KTally> = k_range
        .iter()
        .map(|&k| {
            let mut t = KTally { k, ..KTally::default() };
            for s in &seeds {
                let r = row_at[&(*s, k)];
                if r.viable {
                    t.viable += 1;
                    t.coverage += r.free_overlap;
                }
            }
            t
        })
        .collect();
    let quota = p.viability_quota(seeds.len());
    let selected = select_threshold(p, &tallies, quota);
    let argmax = tallies.iter().filter(|t| t.viable > 0).max_by_key(|t| (t.viable, t.k)).map(|t| t.k);
    ViabilityReport { h, seeds, rows, tallies, quota, selected, argmax }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeakyRow {
    pub s: usize,
    pub t: usize,
    pub leaking: bool,
    /// Smallest certificate of non-leakiness.
    pub certificate_k: Option<usize>,
    /// Conductance of the certificate's level set.
    pub conductance: Option<f64>,
    /// Bucket indices `r` (ranks `[2^r, 2^{r+1})`, 1-based) whose mass
    /// inside the free set is at least α.
    pub heavy_buckets: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeakyReport {
    pub s: usize,
    pub rows: Vec<LeakyRow>,
}

impl LeakyReport {
    pub fn non_leaking(&self) -> usize {
        self.rows.iter().filter(|r| !r.leaking).count()
    }
}

/// Classifies every timestep `1..=ℓ` for source `s`. A timestep leaks when
/// every level set inside the support with `|L ∩ F| >= α²k/400` has
/// conductance at least `1/(dℓ^{1/3})`.
pub fn leaky_census<M: Mass>(g: &BoundedDegreeGraph, params: &OracleParams, s: usize, free: &VertexSet) -> LeakyReport {
    let n = g.num_vertices();
    let d = g.degree_bound();
    let trunc = Truncation::<M>::new(params.rho);
    let gate = params.alpha * params.alpha / 400.0;
    let bound = params.leak_conductance();
    let traj = truncated_trajectory::<M>(g, s, params.ell, &trunc);
    let rows = (1..=params.ell)
        .map(|t| {
            let p = &traj[t];
            let ranked = p.ranking();
            let cuts = prefix_cuts(g, &ranked);
            let max_k = params.max_support().min(ranked.len());
            let mut in_free = 0usize;
            let mut cert = None;
            for k in 1..=max_k {
                in_free += usize::from(free.contains(ranked[k - 1]));
                if (in_free as f64) < gate * k as f64 {
                    continue;
                }
                let Ok(phi) = Conductance::new(cuts[k], k, n, d) else { continue };
                if phi.less_than(bound) {
                    cert = Some((k, phi.value()));
                    break;
                }
            }
            LeakyRow {
                s,
                t,
                leaking: cert.is_none(),
                certificate_k: cert.map(|c| c.0),
                conductance: cert.map(|c| c.1),
                heavy_buckets: heavy_buckets(p, &ranked, free, params.alpha),
            }
        })
        .collect();
    LeakyReport { s, rows }
}

fn heavy_buckets<M: Mass>(p: &MassVector<M>, ranked: &[usize], free: &VertexSet, alpha: f64) -> Vec<u32> {
    let mut out = Vec::new();
    let mut r = 0u32;
    while (1usize << r) <= ranked.len() {
        let lo = (1usize << r) - 1;
        let hi = ((1usize << (r + 1)) - 1).min(ranked.len());
        let mass: f64 =
            ranked[lo..hi].iter().filter(|&&v| free.contains(v)).map(|&v| p.get(v).map_or(0.0, Mass::to_f64)).sum();
        if mass >= alpha {
            out.push(r);
        }
        r += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodSeedReport {
    pub free_size: usize,
    /// Timesteps a seed needs, `βℓ/8`.
    pub required_steps: f64,
    /// Mass in `F` a timestep needs, `β/16`.
    pub mass_threshold: f64,
    pub good_seeds: Vec<usize>,
}

impl GoodSeedReport {
    pub fn count(&self) -> usize {
        self.good_seeds.len()
    }
}

/// Seeds `s ∈ F` with at least `βℓ/8` timesteps `t ∈ [1, ℓ]` at which
/// `M̂ᵗs` puts mass at least `β/16` on `F`.
pub fn good_seed_census<M: Mass>(g: &BoundedDegreeGraph, params: &OracleParams, free: &VertexSet) -> GoodSeedReport {
    let trunc = Truncation::<M>::new(params.rho);
    let required = params.beta * params.ell as f64 / 8.0;
    let threshold = params.beta / 16.0;
    let good_seeds = free
        .as_slice()
        .par_iter()
        .copied()
        .filter(|&s| {
            let traj = truncated_trajectory::<M>(g, s, params.ell, &trunc);
            let hits = traj[1..].iter().filter(|p| p.mass_in(free).to_f64() >= threshold).count();
            hits as f64 >= required
        })
        .collect();
    GoodSeedReport { free_size: free.len(), required_steps: required, mass_threshold: threshold, good_seeds }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divergence {
    pub v: usize,
    pub local: VertexSet,
    pub global: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DifferentialReport {
    pub checked: usize,
    pub divergence: Option<Divergence>,
}

impl DifferentialReport {
    pub fn is_clean(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Compares `local(v)` with the piece of `v` in `global` for every vertex
/// and reports the first mismatch.
pub fn differential_check_with(
    g: &BoundedDegreeGraph,
    global: &Partition,
    local: impl Fn(usize) -> VertexSet + Sync,
) -> DifferentialReport {
    let pieces = global.pieces(g);
    let ids = global.piece_ids(g);
    let n = g.num_vertices();
    let divergence = (0..n).into_par_iter().find_first(|&v| local(v) != pieces[ids[v]]).map(|v| Divergence {
        v,
        local: local(v),
        global: pieces[ids[v]].clone(),
    });
    DifferentialReport { checked: n, divergence }
}

/// Audits the local oracle against a global run under the same thresholds.
pub fn differential_check<M: Mass>(
    g: &BoundedDegreeGraph,
    ctx: &SeedContext,
    thresholds: &PhaseThresholds,
) -> DifferentialReport {
    let run = crate::oracle::global_run_with::<M>(g, ctx, thresholds);
    let oracle = PartitionOracle::<M>::with_thresholds(g, ctx.clone(), thresholds.clone())
        .expect("context parameters were validated");
    differential_check_with(g, &run.partition, |v| oracle.find_partition(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_grid, gen_path};

    #[test]
    fn singleton_and_whole_partitions() {
        let g = gen_path(3).unwrap();
        let r = measure_cut(&g, &Partition::singletons(3), 0.1);
        assert_eq!(r.cut_edges, 2);
        assert_eq!(r.singleton_fraction, 1.0);
        assert_eq!(r.incident_cut_fraction, 1.0);
        let r = measure_cut(&g, &Partition::from_anchors(vec![0; 3]), 0.1);
        assert_eq!((r.cut_edges, r.cut_fraction), (0, 0.0));
        assert_eq!(r.piece_size_histogram, BTreeMap::from([(3, 1)]));
    }

    #[test]
    fn empty_free_set_has_no_viable_seeds_and_leaks_everywhere() {
        let g = gen_grid(6, 6).unwrap();
        let ctx = SeedContext::new(3, OracleParams::explicit(0.1, 4));
        let r = viability_census::<f64>(&g, &ctx, 1, &VertexSet::new(), &[2, 4, 8], CensusSeeds::AllActive);
        assert!(r.tallies.iter().all(|t| t.viable == 0 && t.coverage == 0));
        assert_eq!((r.selected, r.argmax), (0, None));
        let mut p = OracleParams::explicit(0.1, 4);
        // A positive gate makes the empty free set block every level set.
        p.alpha = 1.0;
        let leak = leaky_census::<f64>(&g, &p, 14, &VertexSet::new());
        assert!(leak.rows.iter().all(|r| r.leaking && r.certificate_k.is_none()));
    }

    #[test]
    fn full_free_set_counts_mass_only() {
        let g = gen_cycle(12).unwrap();
        let p = OracleParams::explicit(0.1, 2);
        let all: VertexSet = (0..12).collect();
        // Truncation keeps most of the mass on a cycle at ρ = 10⁻³.
        assert_eq!(good_seed_census::<f64>(&g, &p, &all).count(), 12);
    }

    #[test]
    fn reversed_tie_break_is_caught() {
        let g = gen_path(4).unwrap();
        let global = Partition::from_anchors(vec![0, 0, 2, 2]);
        let clean = differential_check_with(&g, &global, |v| global.piece_of(&g, v));
        assert!(clean.is_clean());
        let bad =
            differential_check_with(&g, &global, |v| if v < 2 { (0..3).collect() } else { global.piece_of(&g, v) });
        assert_eq!(bad.divergence.unwrap().v, 0);
    }
}
