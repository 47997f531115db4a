//! Size-threshold search.
//!
//! For each phase `h` a fixed stream of uniform vertex draws is filtered to
//! the draws whose phase is at least `h`. Each kept seed `s` is tested for
//! every candidate `k`: it is viable when `cluster(s, t_s, k)` is not a
//! singleton and overlaps the free set `F_h` in at least `β³k` vertices.
//! A candidate qualifies once its viable count reaches `12β⁴|S_h|`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::diffusion::Mass;
use crate::graph::VertexSet;

use super::cluster::ClusterScan;
use super::local::PartitionOracle;
use super::params::{KSelection, OracleParams};
use super::seed::{Purpose, SeedContext};

/// Per-phase size thresholds `k_1..k_h̄`; the last entry is always zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseThresholds(Vec<usize>);

impl PhaseThresholds {
    /// Panics unless the final threshold is zero.
    pub fn new(ks: Vec<usize>) -> Self {
        assert_eq!(ks.last(), Some(&0), "the last phase threshold must be zero");
        Self(ks)
    }

    /// All-zero thresholds: every cluster is a singleton.
    pub fn zeros(h_bar: usize) -> Self {
        Self(vec![0; h_bar.max(1)])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `k_h` for `1 <= h <= h̄`.
    pub fn get(&self, h: usize) -> usize {
        self.0[h - 1]
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Everything the finder saw while deciding one phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDecision {
    pub h: usize,
    /// Draws whose phase is at least `h`, in draw order, before truncation.
    pub active_draws: usize,
    /// `true` when too few draws were active and the phase was skipped.
    pub gated: bool,
    /// The kept multiset `S_h`.
    pub seeds: Vec<usize>,
    pub tallies: Vec<KTally>,
    pub quota: f64,
    pub chosen: usize,
}

/// The kept seed multiset for phase `h`, with the number of active draws.
pub fn phase_sample(ctx: &SeedContext, n: usize, h: usize) -> (Vec<usize>, usize) {
    let p = ctx.params();
    if n == 0 {
        return (Vec::new(), 0);
    }
    let active: Vec<usize> = (0..p.sample_count as u64)
        .map(|i| ctx.draw_below(Purpose::ThresholdSample, h as u32, i, n))
        .filter(|&v| ctx.phase_of(v) >= h)
        .collect();
    let total = active.len();
    (active.into_iter().take(p.keep_count).collect(), total)
}

/// Viability of a cluster at threshold `k` given its free-overlap count.
pub fn is_viable(params: &OracleParams, cluster: &VertexSet, free_overlap: usize, k: usize) -> bool {
    cluster.len() > 1 && free_overlap as f64 >= params.viability_overlap(k)
}

/// Viability tally of one candidate over a seed multiset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KTally {
    pub k: usize,
    /// Viable seeds, counted with multiplicity.
    pub viable: usize,
    /// Sum of `|C ∩ F_h|` over the viable seeds.
    pub coverage: usize,
}

/// Picks `k_h` among the candidates whose viable count meets the quota.
pub fn select_threshold(params: &OracleParams, tallies: &[KTally], quota: f64) -> usize {
    let qualifying = tallies.iter().filter(|t| t.viable > 0 && t.viable as f64 >= quota);
    let best = match params.k_selection {
        KSelection::MostViable => qualifying.max_by_key(|t| (t.viable, t.k)),
        KSelection::MostCoverage => qualifying.max_by_key(|t| (t.coverage, std::cmp::Reverse(t.k))),
        KSelection::Largest => qualifying.max_by_key(|t| t.k),
        KSelection::Smallest => qualifying.min_by_key(|t| t.k),
    };
    best.map_or(0, |t| t.k)
}

/// Viability tallies of `seeds` for every candidate `k`. `scan(s)` sweeps
/// `M̂^{t_s} s` and `free(u)` decides `u ∈ F_h`.
pub fn viable_tallies(
    params: &OracleParams,
    seeds: &[usize],
    mut scan: impl FnMut(usize) -> ClusterScan,
    mut free: impl FnMut(usize) -> bool,
) -> Vec<KTally> {
    let mut scans: HashMap<usize, ClusterScan> = HashMap::new();
    let mut free_memo: HashMap<usize, bool> = HashMap::new();
    let mut tallies: Vec<KTally> = params.k_candidates.iter().map(|&k| KTally { k, ..KTally::default() }).collect();
    for &s in seeds {
        let sc = scans.entry(s).or_insert_with(|| scan(s));
        for tally in tallies.iter_mut() {
            let c = sc.cluster(tally.k);
            if c.len() <= 1 {
                continue;
            }
            let overlap = c.iter().filter(|&u| *free_memo.entry(u).or_insert_with(|| free(u))).count();
            if is_viable(params, &c, overlap, tally.k) {
                tally.viable += 1;
                tally.coverage += overlap;
            }
        }
    }
    tallies
}

/// Decides phase `h` given a free-set membership test for `F_h`.
pub fn decide_with(
    ctx: &SeedContext,
    n: usize,
    h: usize,
    scan: impl FnMut(usize) -> ClusterScan,
    free: impl FnMut(usize) -> bool,
) -> PhaseDecision {
    let p = ctx.params();
    let (seeds, active_draws) = phase_sample(ctx, n, h);
    let gated = active_draws as f64 <= p.gate_count / 2.0;
    let quota = p.viability_quota(seeds.len());
    if gated || h >= p.h_bar {
        return PhaseDecision { h, active_draws, gated, seeds, tallies: Vec::new(), quota, chosen: 0 };
    }
    let tallies = viable_tallies(p, &seeds, scan, free);
    let chosen = select_threshold(p, &tallies, quota);
    PhaseDecision { h, active_draws, gated, seeds, tallies, quota, chosen }
}

/// Decides phase `h` through the local free-set oracle. `ks` holds the
/// thresholds of phases `1..h`.
pub fn decide_phase<M: Mass>(oracle: &PartitionOracle<'_, M>, h: usize, ks: &[usize]) -> PhaseDecision {
    let ctx = oracle.ctx();
    decide_with(
        ctx,
        oracle.graph().num_vertices(),
        h,
        |s| oracle.scan(s, ctx.walk_len_of(s)),
        |u| oracle.is_free_with(u, h, ks),
    )
}

pub fn find_thresholds<M: Mass>(oracle: &PartitionOracle<'_, M>) -> PhaseThresholds {
    let h_bar = oracle.params().h_bar;
    let mut ks = Vec::with_capacity(h_bar);
    for h in 1..=h_bar {
        let k = decide_phase(oracle, h, &ks).chosen;
        ks.push(k);
    }
    PhaseThresholds::new(ks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> OracleParams {
        OracleParams::explicit(0.1, 4)
    }

    #[test]
    fn selection_rules() {
        let mut p = params();
        let t = |k, viable, coverage| KTally { k, viable, coverage };
        let viable = [t(2, 3, 6), t(3, 5, 15), t(4, 5, 12), t(5, 5, 15), t(6, 1, 6)];
        p.k_selection = KSelection::MostViable;
        assert_eq!(select_threshold(&p, &viable, 2.0), 5);
        p.k_selection = KSelection::MostCoverage;
        assert_eq!(select_threshold(&p, &viable, 2.0), 3);
        p.k_selection = KSelection::Smallest;
        assert_eq!(select_threshold(&p, &viable, 2.0), 2);
        p.k_selection = KSelection::Largest;
        assert_eq!(select_threshold(&p, &viable, 2.0), 5);
        assert_eq!(select_threshold(&p, &viable, 6.0), 0);
        // A zero count never qualifies, even against a zero quota.
        assert_eq!(select_threshold(&p, &[t(1, 0, 0)], 0.0), 0);
    }

    #[test]
    fn thresholds_end_in_zero() {
        assert_eq!(PhaseThresholds::zeros(3).as_slice(), &[0, 0, 0]);
        assert_eq!(PhaseThresholds::new(vec![4, 0]).get(1), 4);
    }

    #[test]
    #[should_panic]
    fn nonzero_last_threshold_rejected() {
        PhaseThresholds::new(vec![1, 2]);
    }

    #[test]
    fn gate_blocks_sparse_phases() {
        let mut p = params();
        p.sample_count = 10;
        p.gate_count = 1000.0;
        let ctx = SeedContext::new(1, p);
        let d = decide_with(&ctx, 50, 1, |_| unreachable!(), |_| true);
        assert!(d.gated);
        assert_eq!(d.chosen, 0);
    }

    #[test]
    fn sample_is_deterministic_and_phase_filtered() {
        let ctx = SeedContext::new(9, params());
        let (a, total) = phase_sample(&ctx, 300, 3);
        assert_eq!((a.clone(), total), phase_sample(&ctx, 300, 3));
        assert!(a.len() <= ctx.params().keep_count);
        assert!(a.iter().all(|&v| ctx.phase_of(v) >= 3));
    }
}
