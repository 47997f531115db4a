//! Sweep-cut clustering over a truncated diffusion vector.

use crate::diffusion::{prefix_cuts, truncated_diffusion, Conductance, Mass, MassVector};
use crate::graph::{BoundedDegreeGraph, VertexSet};

use super::params::OracleParams;

/// Precomputed sweep over `p̂ = M̂ᵗ v`: the ranked support, prefix cut sizes
/// and the position of `v` itself. Answers `cluster(v, t, k)` for any `k`
/// without re-running the diffusion.
#[derive(Clone, Debug)]
pub struct ClusterScan {
    v: usize,
    n: usize,
    d: usize,
    phi: f64,
    ranked: Vec<usize>,
    cuts: Vec<usize>,
    /// Rank of `v` in `ranked`, `None` if `v` is not in the support.
    v_rank: Option<usize>,
    /// Ranks of `v`'s neighbors that lie in the support, ascending.
    neighbor_ranks: Vec<usize>,
    v_degree: usize,
}

impl ClusterScan {
    pub fn new<M: Mass>(g: &BoundedDegreeGraph, p: &MassVector<M>, v: usize, phi: f64) -> Self {
        let ranked = p.ranking();
        let cuts = prefix_cuts(g, &ranked);
        let mut rank_of = std::collections::HashMap::with_capacity(ranked.len());
        for (i, &u) in ranked.iter().enumerate() {
            rank_of.insert(u, i);
        }
        let mut neighbor_ranks: Vec<usize> = g.neighbors(v).iter().filter_map(|w| rank_of.get(w).copied()).collect();
        neighbor_ranks.sort_unstable();
        Self {
            v,
            n: g.num_vertices(),
            d: g.degree_bound(),
            phi,
            v_rank: rank_of.get(&v).copied(),
            ranked,
            cuts,
            neighbor_ranks,
            v_degree: g.degree(v),
        }
    }

    pub fn seed(&self) -> usize {
        self.v
    }

    pub fn support_len(&self) -> usize {
        self.ranked.len()
    }

    /// Size and conductance of `L(k') ∪ {v}`, or `None` if conductance is
    /// undefined for it.
    fn candidate(&self, k_prime: usize) -> Option<(usize, Conductance)> {
        let v_rank = self.v_rank?;
        let (size, cut) = if v_rank < k_prime {
            (k_prime, self.cuts[k_prime])
        } else {
            let inside = self.neighbor_ranks.partition_point(|&r| r < k_prime);
            (k_prime + 1, self.cuts[k_prime] + self.v_degree - 2 * inside)
        };
        Conductance::new(cut, size, self.n, self.d).ok().map(|c| (size, c))
    }

    /// Largest accepted `k'` in `[k, 2k]` together with the resulting set size
    /// and conductance.
    pub fn accepted(&self, k: usize) -> Option<(usize, usize, Conductance)> {
        if k == 0 || self.v_rank.is_none() {
            return None;
        }
        let top = (2 * k).min(self.ranked.len());
        (k..=top).rev().find_map(|k_prime| {
            let (size, phi) = self.candidate(k_prime)?;
            (size >= k && size <= 2 * k && phi.at_most(self.phi)).then_some((k_prime, size, phi))
        })
    }

    /// The output set of `cluster(v, t, k)`.
    pub fn cluster(&self, k: usize) -> VertexSet {
        match self.accepted(k) {
            Some((k_prime, _, _)) => self.ranked[..k_prime].iter().copied().chain(std::iter::once(self.v)).collect(),
            None => VertexSet::singleton(self.v),
        }
    }
}

/// `cluster(v, t, k)`: `{v}` when `k = 0`, when `v` was truncated away, or
/// when no level set qualifies; otherwise `L_v^t(k') ∪ {v}` for the largest
/// `k' ∈ [k, 2k]` whose set has size in `[k, 2k]`, lies in the support, and
/// has conductance at most φ.
pub fn cluster<M: Mass>(g: &BoundedDegreeGraph, params: &OracleParams, v: usize, t: usize, k: usize) -> VertexSet {
    if k == 0 {
        return VertexSet::singleton(v);
    }
    let p = truncated_diffusion::<M>(g, v, t, params.rho);
    ClusterScan::new(g, &p, v, params.phi).cluster(k)
}
