use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::{BoundedDegreeGraph, VertexSet};

use super::params::OracleParams;

/// Vertex → anchor map. Pieces are the maximal connected groups of vertices
/// sharing an anchor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    anchors: Vec<usize>,
}

impl Partition {
    pub fn from_anchors(anchors: Vec<usize>) -> Self {
        Self { anchors }
    }

    /// Every vertex its own anchor.
    pub fn singletons(n: usize) -> Self {
        Self { anchors: (0..n).collect() }
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    pub fn anchor(&self, v: usize) -> usize {
        self.anchors[v]
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Piece index for every vertex; pieces are numbered in order of their
    /// smallest vertex.
    pub fn piece_ids(&self, g: &BoundedDegreeGraph) -> Vec<usize> {
        let n = self.anchors.len();
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for root in 0..n {
            if id[root] != usize::MAX {
                continue;
            }
            id[root] = next;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &w in g.neighbors(u) {
                    if id[w] == usize::MAX && self.anchors[w] == self.anchors[root] {
                        id[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        id
    }

    pub fn pieces(&self, g: &BoundedDegreeGraph) -> Vec<VertexSet> {
        let ids = self.piece_ids(g);
        let count = ids.iter().copied().max().map_or(0, |m| m + 1);
        let mut pieces: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (v, &i) in ids.iter().enumerate() {
            pieces[i].push(v);
        }
        pieces.into_iter().map(VertexSet::from_sorted).collect()
    }

    /// The piece containing `v`.
    pub fn piece_of(&self, g: &BoundedDegreeGraph, v: usize) -> VertexSet {
        let a = self.anchors[v];
        let mut seen = vec![v];
        let mut queue = VecDeque::from([v]);
        let mut mark = std::collections::HashSet::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if self.anchors[w] == a && mark.insert(w) {
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Edges whose endpoints lie in different pieces. Adjacent vertices with
    /// equal anchors always share a piece, so this counts anchor changes.
    pub fn cut_edges(&self, g: &BoundedDegreeGraph) -> usize {
        g.edges().filter(|&(u, v)| self.anchors[u] != self.anchors[v]).count()
    }

    pub fn piece_size_histogram(&self, g: &BoundedDegreeGraph) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for p in self.pieces(g) {
            *hist.entry(p.len()).or_insert(0) += 1;
        }
        hist
    }
}

/// JSON export of a partition run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionExport {
    pub seed: u64,
    pub params: OracleParams,
    pub anchors: Vec<usize>,
    pub cut_edges: usize,
}

impl PartitionExport {
    pub fn new(g: &BoundedDegreeGraph, seed: u64, params: &OracleParams, partition: &Partition) -> Self {
        Self { seed, params: params.clone(), anchors: partition.anchors.clone(), cut_edges: partition.cut_edges(g) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_path};

    #[test]
    fn same_anchor_split_by_gap_gives_two_pieces() {
        let g = gen_path(5).unwrap();
        let p = Partition::from_anchors(vec![0, 0, 2, 0, 0]);
        let pieces = p.pieces(&g);
        assert_eq!(pieces.len(), 3);
        assert_eq!(pieces[0].as_slice(), &[0, 1]);
        assert_eq!(pieces[2].as_slice(), &[3, 4]);
        assert_eq!(p.piece_of(&g, 4).as_slice(), &[3, 4]);
        assert_eq!(p.cut_edges(&g), 2);
        assert_eq!(p.piece_size_histogram(&g), BTreeMap::from([(1, 1), (2, 2)]));
    }

    #[test]
    fn singletons_cut_everything() {
        let g = gen_cycle(6).unwrap();
        assert_eq!(Partition::singletons(6).cut_edges(&g), 6);
        assert_eq!(Partition::from_anchors(vec![3; 6]).cut_edges(&g), 0);
    }
}
