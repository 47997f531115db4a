//! Reference global run: process every vertex in `≺` order, carve each
//! seed's cluster out of the free set, and anchor the carved vertices at the
//! seed.
//!
//! Thresholds are decided phase by phase against the global free set itself,
//! so this run shares no free-set or inverse-ball code with the local oracle.

use crate::diffusion::{truncated_diffusion, Mass};
use crate::graph::BoundedDegreeGraph;

use super::cluster::ClusterScan;
use super::findr::{decide_with, PhaseDecision, PhaseThresholds};
use super::partition::Partition;
use super::seed::SeedContext;

/// Full record of a global run.
#[derive(Clone, Debug)]
pub struct GlobalRun {
    pub partition: Partition,
    pub thresholds: PhaseThresholds,
    pub decisions: Vec<PhaseDecision>,
    /// Phase of the seed that removed each vertex from the free set.
    removed_in: Vec<usize>,
}

impl GlobalRun {
    /// `u ∈ F_h`: `u` was still free when phase `h` started.
    pub fn is_free(&self, u: usize, h: usize) -> bool {
        self.removed_in[u] >= h
    }

    pub fn free_set(&self, h: usize) -> Vec<usize> {
        (0..self.removed_in.len()).filter(|&u| self.is_free(u, h)).collect()
    }
}

fn scan<M: Mass>(g: &BoundedDegreeGraph, ctx: &SeedContext, s: usize) -> ClusterScan {
    let p = ctx.params();
    let vec = truncated_diffusion::<M>(g, s, ctx.walk_len_of(s), p.rho);
    ClusterScan::new(g, &vec, s, p.phi)
}

/// Runs the global partition, deciding thresholds along the way.
pub fn global_run<M: Mass>(g: &BoundedDegreeGraph, ctx: &SeedContext) -> GlobalRun {
    global_run_inner::<M>(g, ctx, None)
}

/// Runs the global partition under fixed thresholds.
pub fn global_run_with<M: Mass>(g: &BoundedDegreeGraph, ctx: &SeedContext, thresholds: &PhaseThresholds) -> GlobalRun {
    global_run_inner::<M>(g, ctx, Some(thresholds))
}

fn global_run_inner<M: Mass>(g: &BoundedDegreeGraph, ctx: &SeedContext, fixed: Option<&PhaseThresholds>) -> GlobalRun {
    let n = g.num_vertices();
    let h_bar = ctx.params().h_bar;
    let mut by_phase: Vec<Vec<usize>> = vec![Vec::new(); h_bar + 1];
    for v in 0..n {
        by_phase[ctx.phase_of(v)].push(v);
    }
    let mut anchors = vec![usize::MAX; n];
    let mut removed_in = vec![usize::MAX; n];
    let mut ks = Vec::with_capacity(h_bar);
    let mut decisions = Vec::new();
    for (h, seeds) in by_phase.iter().enumerate().skip(1) {
        let k = match fixed {
            Some(t) => t.get(h),
            None => {
                let d = decide_with(ctx, n, h, |s| scan::<M>(g, ctx, s), |u| anchors[u] == usize::MAX);
                let k = d.chosen;
                decisions.push(d);
                k
            }
        };
        ks.push(k);
        for &v in seeds {
            let cluster = if k == 0 { vec![v] } else { scan::<M>(g, ctx, v).cluster(k).into_vec() };
            // Every free vertex of the cluster is anchored at `v`; its
            // connected pieces fall out of the same-anchor components.
            for u in cluster {
                if anchors[u] == usize::MAX {
                    anchors[u] = v;
                    removed_in[u] = h;
                }
            }
        }
    }
    debug_assert!(anchors.iter().all(|&a| a != usize::MAX));
    GlobalRun {
        partition: Partition::from_anchors(anchors),
        thresholds: fixed.cloned().unwrap_or_else(|| PhaseThresholds::new(ks)),
        decisions,
        removed_in,
    }
}

pub fn global_partition<M: Mass>(g: &BoundedDegreeGraph, ctx: &SeedContext) -> Partition {
    global_run::<M>(g, ctx).partition
}
