//! The local partition oracle.
//!
//! All answers are functions of `(graph, master seed, params)` only. Internal
//! memo tables cache pure sub-results (diffusion supports, seed clusters,
//! inverse balls, anchors); they change how often work is repeated, never
//! what is returned.

use std::collections::{HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::{truncated_trajectory, Mass, MassVector, Truncation};
use crate::graph::{BoundedDegreeGraph, VertexSet};

use super::cluster::ClusterScan;
use super::findr::{self, PhaseDecision, PhaseThresholds};
use super::params::{OracleParams, ParamError};
use super::partition::Partition;
use super::seed::SeedContext;

/// Work counters. Deterministic for a single-threaded query sequence on a
/// fresh oracle.
#[derive(Debug, Default)]
struct Counters {
    trajectories: AtomicU64,
    cluster_scans: AtomicU64,
    anchor_searches: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WorkStats {
    pub trajectories: u64,
    pub cluster_scans: u64,
    pub anchor_searches: u64,
}

pub struct PartitionOracle<'g, M: Mass = f64> {
    graph: &'g BoundedDegreeGraph,
    ctx: SeedContext,
    trunc: Truncation<M>,
    supports: Vec<OnceLock<Arc<[VertexSet]>>>,
    seed_clusters: Vec<OnceLock<VertexSet>>,
    balls: Vec<OnceLock<VertexSet>>,
    anchors: Vec<OnceLock<usize>>,
    thresholds: OnceLock<PhaseThresholds>,
    counters: Counters,
}

fn fresh<T>(n: usize) -> Vec<OnceLock<T>> {
    (0..n).map(|_| OnceLock::new()).collect()
}

impl<'g, M: Mass> PartitionOracle<'g, M> {
    pub fn new(graph: &'g BoundedDegreeGraph, ctx: SeedContext) -> Result<Self, ParamError> {
        ctx.params().validate()?;
        let n = graph.num_vertices();
        Ok(Self {
            graph,
            trunc: Truncation::new(ctx.params().rho),
            ctx,
            supports: fresh(n),
            seed_clusters: fresh(n),
            balls: fresh(n),
            anchors: fresh(n),
            thresholds: OnceLock::new(),
            counters: Counters::default(),
        })
    }

    /// Oracle with thresholds supplied instead of computed.
    pub fn with_thresholds(
        graph: &'g BoundedDegreeGraph,
        ctx: SeedContext,
        thresholds: PhaseThresholds,
    ) -> Result<Self, ParamError> {
        let oracle = Self::new(graph, ctx)?;
        oracle.thresholds.set(thresholds).expect("fresh oracle");
        Ok(oracle)
    }

    pub fn graph(&self) -> &'g BoundedDegreeGraph {
        self.graph
    }

    pub fn ctx(&self) -> &SeedContext {
        &self.ctx
    }

    pub fn params(&self) -> &OracleParams {
        self.ctx.params()
    }

    pub fn stats(&self) -> WorkStats {
        WorkStats {
            trajectories: self.counters.trajectories.load(Ordering::Relaxed),
            cluster_scans: self.counters.cluster_scans.load(Ordering::Relaxed),
            anchor_searches: self.counters.anchor_searches.load(Ordering::Relaxed),
        }
    }

    /// `supp(M̂ᵗ w)` for `t = 0..=ℓ`.
    pub fn supports_of(&self, w: usize) -> Arc<[VertexSet]> {
        self.supports[w]
            .get_or_init(|| {
                self.counters.trajectories.fetch_add(1, Ordering::Relaxed);
                truncated_trajectory::<M>(self.graph, w, self.params().ell, &self.trunc)
                    .iter()
                    .map(MassVector::support)
                    .collect()
            })
            .clone()
    }

    /// Sweep structure for `M̂ᵗ s`.
    pub fn scan(&self, s: usize, t: usize) -> ClusterScan {
        self.counters.cluster_scans.fetch_add(1, Ordering::Relaxed);
        let p = crate::diffusion::truncated_diffusion::<M>(self.graph, s, t, self.params().rho);
        ClusterScan::new(self.graph, &p, s, self.params().phi)
    }

    /// `cluster(s, t_s, k_{h_s})`. `ks` must hold the thresholds of every
    /// phase up to `h_s`.
    pub(crate) fn seed_cluster_with(&self, s: usize, ks: &[usize]) -> VertexSet {
        self.seed_clusters[s]
            .get_or_init(|| {
                let h = self.ctx.phase_of(s);
                let k = ks[h - 1];
                if k == 0 {
                    VertexSet::singleton(s)
                } else {
                    self.scan(s, self.ctx.walk_len_of(s)).cluster(k)
                }
            })
            .clone()
    }

    /// `cluster(s, t_s, k_{h_s})` under the final thresholds.
    pub fn seed_cluster(&self, s: usize) -> VertexSet {
        let ks = self.thresholds().as_slice().to_vec();
        self.seed_cluster_with(s, &ks)
    }

    /// Inverse ball `IB(v) = {w : ∃t ≤ ℓ, v ∈ supp(M̂ᵗ w)}`, grown one step
    /// at a time from `{v}` by testing the neighbors of the current set.
    pub fn find_ib(&self, v: usize) -> VertexSet {
        self.balls[v]
            .get_or_init(|| {
                let ell = self.params().ell;
                let mut members: HashSet<usize> = HashSet::from([v]);
                for t in 1..=ell {
                    let mut frontier: Vec<usize> = members
                        .iter()
                        .flat_map(|&u| self.graph.neighbors(u).iter().copied().chain([u]))
                        .filter(|w| !members.contains(w))
                        .collect();
                    frontier.sort_unstable();
                    frontier.dedup();
                    let found: Vec<usize> =
                        frontier.into_iter().filter(|&w| self.supports_of(w)[t].contains(v)).collect();
                    members.extend(found);
                }
                members.into_iter().collect()
            })
            .clone()
    }

    /// `u ∈ F_h`, given thresholds for every phase below `h`.
    pub(crate) fn is_free_with(&self, u: usize, h: usize, ks: &[usize]) -> bool {
        if h <= 1 {
            return true;
        }
        debug_assert!(ks.len() >= h - 1);
        !self.find_ib(u).iter().filter(|&w| self.ctx.phase_of(w) < h).any(|w| self.seed_cluster_with(w, ks).contains(u))
    }

    /// Membership test for the free set at the start of phase `h`.
    pub fn is_free(&self, u: usize, h: usize) -> bool {
        let ks = self.thresholds().as_slice().to_vec();
        self.is_free_with(u, h, &ks)
    }

    /// Phase thresholds, computed once on first use.
    pub fn thresholds(&self) -> &PhaseThresholds {
        self.thresholds.get_or_init(|| findr::find_thresholds(self))
    }

    /// The threshold finder's full record for phase `h`, recomputed from
    /// the final thresholds of earlier phases.
    pub fn phase_decision(&self, h: usize) -> PhaseDecision {
        let ks = self.thresholds().as_slice();
        findr::decide_phase(self, h, &ks[..h - 1])
    }

    /// All seeds in `IB(v)` whose cluster contains `v`, in processing order.
    pub fn anchor_candidates(&self, v: usize) -> Vec<usize> {
        let mut cands: Vec<usize> = self.find_ib(v).iter().filter(|&s| self.seed_cluster(s).contains(v)).collect();
        cands.sort_by_key(|&s| self.ctx.order_key(s));
        cands
    }

    /// The `≺`-smallest seed in `IB(v)` whose cluster contains `v`.
    pub fn find_anchor(&self, v: usize) -> usize {
        *self.anchors[v].get_or_init(|| {
            self.counters.anchor_searches.fetch_add(1, Ordering::Relaxed);
            let ks = self.thresholds().as_slice().to_vec();
            let mut ball = self.find_ib(v).into_vec();
            ball.sort_by_key(|&s| self.ctx.order_key(s));
            ball.into_iter().find(|&s| self.seed_cluster_with(s, &ks).contains(v)).expect("v lies in its own cluster")
        })
    }

    /// The piece containing `v`: BFS over vertices sharing `v`'s anchor.
    pub fn find_partition(&self, v: usize) -> VertexSet {
        let anchor = self.find_anchor(v);
        let mut seen = HashSet::from([v]);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in self.graph.neighbors(u) {
                if !seen.contains(&w) && self.find_anchor(w) == anchor {
                    seen.insert(w);
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Anchors of every vertex, computed in parallel through local queries.
    pub fn local_partition(&self) -> Partition {
        self.thresholds();
        let anchors = (0..self.graph.num_vertices()).into_par_iter().map(|v| self.find_anchor(v)).collect();
        Partition::from_anchors(anchors)
    }
}
