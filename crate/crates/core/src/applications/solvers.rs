//! Exact solvers for small pieces.
//!
//! Cover, independence and domination work on `u64` vertex masks, so they
//! accept at most 64 vertices.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::graph::BoundedDegreeGraph;

/// Hard ceiling of the bitmask solvers.
pub const MASK_LIMIT: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("piece of {size} vertices exceeds the solver cap of {cap}; lower the size thresholds")]
    TooLarge { size: usize, cap: usize },
    #[error("pattern graphs may have at most 5 vertices, got {0}")]
    PatternTooLarge(usize),
}

pub fn check_cap(g: &BoundedDegreeGraph, cap: usize) -> Result<(), SolverError> {
    let size = g.num_vertices();
    if size > cap.min(MASK_LIMIT) {
        return Err(SolverError::TooLarge { size, cap: cap.min(MASK_LIMIT) });
    }
    Ok(())
}

/// Maximum matching size via Edmonds' blossom algorithm.
pub fn max_matching(g: &BoundedDegreeGraph) -> usize {
    Blossom::new(g).solve()
}

const NONE: usize = usize::MAX;

struct Blossom<'a> {
    g: &'a BoundedDegreeGraph,
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'a> Blossom<'a> {
    fn new(g: &'a BoundedDegreeGraph) -> Self {
        let n = g.num_vertices();
        Self {
            g,
            mate: vec![NONE; n],
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn solve(mut self) -> usize {
        let n = self.g.num_vertices();
        // Greedy start; augmenting paths fix whatever it gets wrong.
        for u in 0..n {
            if self.mate[u] == NONE {
                if let Some(&w) = self.g.neighbors(u).iter().find(|&&w| self.mate[w] == NONE) {
                    self.mate[u] = w;
                    self.mate[w] = u;
                }
            }
        }
        for root in 0..n {
            if self.mate[root] != NONE {
                continue;
            }
            let mut v = self.find_path(root);
            while v != NONE {
                let pv = self.parent[v];
                let next = self.mate[pv];
                self.mate[v] = pv;
                self.mate[pv] = v;
                v = next;
            }
        }
        self.mate.iter().filter(|&&m| m != NONE).count() / 2
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.mate.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    /// Grows an alternating tree from `root`; returns the free endpoint of an
    /// augmenting path, or `NONE`.
    fn find_path(&mut self, root: usize) -> usize {
        let n = self.mate.len();
        self.used.fill(false);
        self.parent.fill(NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in self.g.neighbors(v) {
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.fill(false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return to;
                    }
                    let m = self.mate[to];
                    self.used[m] = true;
                    self.queue.push_back(m);
                }
            }
        }
        NONE
    }
}

/// Vertices relabelled in BFS order, as neighbor masks.
fn masks(g: &BoundedDegreeGraph) -> Vec<u64> {
    let n = g.num_vertices();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    order.iter().map(|&v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << pos[w])).collect()
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Minimum vertex cover size.
pub fn min_vertex_cover(g: &BoundedDegreeGraph) -> Result<usize, SolverError> {
    check_cap(g, MASK_LIMIT)?;
    let adj = masks(g);
    let mut memo = HashMap::new();
    Ok(cover(full_mask(adj.len()), &adj, &mut memo) as usize)
}

fn cover(mut mask: u64, adj: &[u64], memo: &mut HashMap<u64, u32>) -> u32 {
    // Isolated vertices never need covering.
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if adj[v] & mask == 0 {
            mask &= !(1 << v);
        }
    }
    if mask == 0 {
        return 0;
    }
    if let Some(&c) = memo.get(&mask) {
        return c;
    }
    let mut best_v = 0;
    let mut best_deg = 0;
    let mut leaf = None;
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let deg = (adj[v] & mask).count_ones();
        if deg == 1 {
            leaf = Some(v);
            break;
        }
        if deg > best_deg {
            best_deg = deg;
            best_v = v;
        }
    }
    let result = if let Some(u) = leaf {
        // Some optimal cover takes the leaf's neighbor.
        let w = (adj[u] & mask).trailing_zeros() as usize;
        1 + cover(mask & !(1 << w) & !(1 << u), adj, memo)
    } else {
        let v = best_v;
        let take_v = 1 + cover(mask & !(1 << v), adj, memo);
        let nbrs = adj[v] & mask;
        let take_nbrs = nbrs.count_ones() + cover(mask & !nbrs & !(1 << v), adj, memo);
        take_v.min(take_nbrs)
    };
    memo.insert(mask, result);
    result
}

/// Maximum independent set size, `n − τ(G)`.
pub fn max_independent_set(g: &BoundedDegreeGraph) -> Result<usize, SolverError> {
    Ok(g.num_vertices() - min_vertex_cover(g)?)
}

/// Minimum dominating set size.
pub fn min_dominating_set(g: &BoundedDegreeGraph) -> Result<usize, SolverError> {
    check_cap(g, MASK_LIMIT)?;
    let closed: Vec<u64> = masks(g).into_iter().enumerate().map(|(i, m)| m | 1 << i).collect();
    let mut memo = HashMap::new();
    Ok(dominate(full_mask(closed.len()), &closed, &mut memo) as usize)
}

fn dominate(undominated: u64, closed: &[u64], memo: &mut HashMap<u64, u32>) -> u32 {
    if undominated == 0 {
        return 0;
    }
    if let Some(&c) = memo.get(&undominated) {
        return c;
    }
    // The lowest undominated vertex must be covered by one of its closed
    // neighbors; skip choices whose gain another choice already contains.
    let u = undominated.trailing_zeros() as usize;
    let mut choices: Vec<u64> = Vec::new();
    let mut rest = closed[u];
    while rest != 0 {
        let w = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        choices.push(closed[w] & undominated);
    }
    choices.sort_unstable_by_key(|c| std::cmp::Reverse(c.count_ones()));
    choices.dedup();
    let mut best = u32::MAX;
    for (i, &gain) in choices.iter().enumerate() {
        if choices[..i].iter().any(|&other| gain & !other == 0) {
            continue;
        }
        best = best.min(1 + dominate(undominated & !gain, closed, memo));
    }
    memo.insert(undominated, best);
    best
}

pub fn is_bipartite(g: &BoundedDegreeGraph) -> bool {
    g.is_bipartite()
}

/// Whether `g` contains `pattern` as a (not necessarily induced) subgraph.
pub fn contains_subgraph(g: &BoundedDegreeGraph, pattern: &BoundedDegreeGraph) -> Result<bool, SolverError> {
    let k = pattern.num_vertices();
    if k > 5 {
        return Err(SolverError::PatternTooLarge(k));
    }
    if k > g.num_vertices() {
        return Ok(false);
    }
    let mut image = vec![NONE; k];
    Ok(embed(g, pattern, 0, &mut image))
}

fn embed(g: &BoundedDegreeGraph, h: &BoundedDegreeGraph, i: usize, image: &mut [usize]) -> bool {
    if i == image.len() {
        return true;
    }
    for v in 0..g.num_vertices() {
        if image[..i].contains(&v) {
            continue;
        }
        let fits = h.neighbors(i).iter().filter(|&&j| j < i).all(|&j| g.has_edge(v, image[j]));
        if fits {
            image[i] = v;
            if embed(g, h, i + 1, image) {
                return true;
            }
        }
    }
    image[i] = NONE;
    false
}

pub fn triangle() -> BoundedDegreeGraph {
    BoundedDegreeGraph::from_edges(3, 2, &[(0, 1), (0, 2), (1, 2)]).expect("valid triangle")
}

pub fn is_triangle_free(g: &BoundedDegreeGraph) -> bool {
    !contains_subgraph(g, &triangle()).expect("triangle has three vertices")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_grid, gen_path, gen_triangulated_grid};

    #[test]
    fn hand_checked_values() {
        let p3 = gen_path(3).unwrap();
        assert_eq!(max_matching(&p3), 1);
        assert_eq!(min_vertex_cover(&p3), Ok(1));
        assert_eq!(max_independent_set(&p3), Ok(2));
        assert_eq!(min_dominating_set(&p3), Ok(1));
        assert_eq!(max_matching(&gen_cycle(6).unwrap()), 3);
        assert_eq!(max_matching(&gen_cycle(7).unwrap()), 3);
    }

    #[test]
    fn blossom_needed_on_odd_cycles() {
        // Triangle with a pendant on each corner has a perfect matching.
        let g = BoundedDegreeGraph::from_edges(6, 3, &[(0, 1), (1, 2), (0, 2), (0, 3), (1, 4), (2, 5)]).unwrap();
        assert_eq!(max_matching(&g), 3);
    }

    #[test]
    fn grid_values() {
        let g = gen_grid(8, 8).unwrap();
        assert_eq!(max_matching(&g), 32);
        assert_eq!(min_vertex_cover(&g), Ok(32));
        assert_eq!(min_dominating_set(&gen_grid(4, 4).unwrap()), Ok(4));
    }

    #[test]
    fn cap_is_a_hard_error() {
        let g = gen_path(65).unwrap();
        assert_eq!(min_vertex_cover(&g), Err(SolverError::TooLarge { size: 65, cap: 64 }));
        assert!(check_cap(&gen_path(10).unwrap(), 8).is_err());
    }

    #[test]
    fn subgraph_search() {
        assert!(is_triangle_free(&gen_grid(5, 5).unwrap()));
        assert!(!is_triangle_free(&gen_triangulated_grid(2, 2).unwrap()));
        let c4 = gen_cycle(4).unwrap();
        assert_eq!(contains_subgraph(&gen_grid(3, 3).unwrap(), &c4), Ok(true));
        assert_eq!(contains_subgraph(&gen_path(9).unwrap(), &c4), Ok(false));
        assert!(contains_subgraph(&gen_path(9).unwrap(), &gen_path(6).unwrap()).is_err());
    }
}
