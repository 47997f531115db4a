//! Immutable bounded-degree graphs, the edge-list file format, and the
//! test-graph generators used throughout the crate.
//!
//! The edge-list format is line oriented:
//!
//! ```text
//! # optional comment lines
//! n d
//! u v
//! ...
//! ```
//!
//! Every edge line lists its endpoints with `u < v`. [`save_graph`] writes the
//! edges in lexicographic order, so `load_graph(save_graph(g)) == g` holds
//! byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Invalid { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    Construction(String),
    #[error("vertex count overflow for {0}")]
    Overflow(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Undirected simple graph with every degree at most `d`.
///
/// Adjacency is stored in compressed form with each neighbor list sorted
/// ascending. Instances are never mutated after construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedDegreeGraph {
    n: usize,
    d: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl BoundedDegreeGraph {
    /// Builds a graph from an edge list, enforcing every invariant.
    pub fn from_edges(n: usize, d: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if d == 0 {
            return Err(GraphError::Construction("degree bound must be positive".into()));
        }
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            check_edge(n, d, u, v, &lists)
                .map_err(|msg| GraphError::Construction(format!("edge #{i} ({u}, {v}): {msg}")))?;
            lists[u].push(v);
            lists[v].push(u);
        }
        Ok(Self::from_lists(n, d, lists))
    }

    fn from_lists(n: usize, d: usize, mut lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Self { n, d, offsets, targets }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// The degree bound `d` (not the maximum realized degree).
    pub fn degree_bound(&self) -> usize {
        self.d
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).iter().copied().filter(move |&v| u < v).map(move |v| (u, v)))
    }

    /// Subgraph induced on `vertices`, relabelled `0..vertices.len()` in the
    /// order given.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> BoundedDegreeGraph {
        let mut index = std::collections::HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            index.insert(v, i);
        }
        let lists = vertices
            .iter()
            .map(|&v| self.neighbors(v).iter().filter_map(|w| index.get(w).copied()).collect())
            .collect();
        Self::from_lists(vertices.len(), self.d, lists)
    }

    /// Proper 2-coloring if one exists.
    pub fn two_coloring(&self) -> Option<Vec<u8>> {
        let mut color = vec![u8::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        for root in 0..self.n {
            if color[root] != u8::MAX {
                continue;
            }
            color[root] = 0;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &w in self.neighbors(u) {
                    if color[w] == u8::MAX {
                        color[w] = 1 - color[u];
                        queue.push_back(w);
                    } else if color[w] == color[u] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }

    pub fn is_bipartite(&self) -> bool {
        self.two_coloring().is_some()
    }

    /// Serializes to the edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 * (self.num_edges() + 1));
        writeln!(out, "{} {}", self.n, self.d).unwrap();
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    /// Parses the edge-list text format. Errors name the offending line.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut lists: Vec<Vec<usize>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (a, b) = parse_pair(line).map_err(|msg| GraphError::Parse { line: line_no, msg })?;
            match header {
                None => {
                    if b == 0 {
                        return Err(GraphError::Invalid { line: line_no, msg: "degree bound must be positive".into() });
                    }
                    header = Some((a, b));
                    lists = vec![Vec::new(); a];
                }
                Some((n, d)) => {
                    if a >= b {
                        return Err(GraphError::Invalid {
                            line: line_no,
                            msg: format!("edge endpoints must satisfy u < v, got {a} {b}"),
                        });
                    }
                    check_edge(n, d, a, b, &lists).map_err(|msg| GraphError::Invalid { line: line_no, msg })?;
                    lists[a].push(b);
                    lists[b].push(a);
                }
            }
        }
        let (n, d) = header.ok_or(GraphError::Parse { line: 0, msg: "missing \"n d\" header".into() })?;
        Ok(Self::from_lists(n, d, lists))
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize), String> {
    let mut it = line.split_ascii_whitespace();
    let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
        return Err(format!("expected two integers, got {line:?}"));
    };
    let a = a.parse::<usize>().map_err(|e| format!("{a:?}: {e}"))?;
    let b = b.parse::<usize>().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

fn check_edge(n: usize, d: usize, u: usize, v: usize, lists: &[Vec<usize>]) -> Result<(), String> {
    if u >= n || v >= n {
        return Err(format!("vertex id out of range (n = {n})"));
    }
    if u == v {
        return Err(format!("self-loop at {u}"));
    }
    if lists[u].contains(&v) {
        return Err(format!("duplicate edge {u} {v}"));
    }
    for x in [u, v] {
        if lists[x].len() >= d {
            return Err(format!("degree of {x} exceeds bound {d}"));
        }
    }
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<BoundedDegreeGraph, GraphError> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|source| GraphError::Io { path: path.display().to_string(), source })?;
    BoundedDegreeGraph::parse_edge_list(&text)
}

pub fn save_graph(g: &BoundedDegreeGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    fs::write(path, g.to_edge_list()).map_err(|source| GraphError::Io { path: path.display().to_string(), source })
}

/// Sorted set of distinct vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn singleton(v: usize) -> Self {
        Self(vec![v])
    }

    /// Takes ownership of an already sorted, deduplicated list.
    pub fn from_sorted(ids: Vec<usize>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Self(ids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn intersection_count(&self, other: &VertexSet) -> usize {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().filter(|&v| large.contains(v)).count()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut ids: Vec<usize> = iter.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

// Generators.

fn checked_product(rows: usize, cols: usize, what: &str) -> Result<usize, GraphError> {
    rows.checked_mul(cols).ok_or_else(|| GraphError::Overflow(format!("{what} {rows}x{cols}")))
}

/// `rows x cols` grid graph. Vertex `(r, c)` has id `r * cols + c`.
pub fn gen_grid(rows: usize, cols: usize) -> Result<BoundedDegreeGraph, GraphError> {
    if rows == 0 || cols == 0 {
        return Err(GraphError::Construction("grid dimensions must be at least 1".into()));
    }
    let n = checked_product(rows, cols, "grid")?;
    let mut edges = Vec::with_capacity(2 * n);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    BoundedDegreeGraph::from_edges(n, 4, &edges)
}

/// Grid plus the down-right diagonal of every unit cell; planar, degree bound 6.
pub fn gen_triangulated_grid(rows: usize, cols: usize) -> Result<BoundedDegreeGraph, GraphError> {
    if rows < 2 || cols < 2 {
        return Err(GraphError::Construction("triangulated grid dimensions must be at least 2".into()));
    }
    let n = checked_product(rows, cols, "triangulated grid")?;
    let mut edges = Vec::with_capacity(3 * n);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
            if r + 1 < rows && c + 1 < cols {
                edges.push((v, v + cols + 1));
            }
        }
    }
    BoundedDegreeGraph::from_edges(n, 6, &edges)
}

/// Random tree where vertex `i` attaches to a uniform earlier vertex that
/// still has spare degree.
pub fn gen_random_tree(n: usize, d: usize, seed: u64) -> Result<BoundedDegreeGraph, GraphError> {
    if n == 0 || d < 2 {
        return Err(GraphError::Construction("random tree needs n >= 1 and d >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut open: Vec<usize> = vec![0];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for v in 1..n {
        let slot = rng.random_range(0..open.len());
        let parent = open[slot];
        edges.push((parent, v));
        degree[parent] += 1;
        degree[v] += 1;
        if degree[parent] == d {
            open.swap_remove(slot);
        }
        open.push(v);
    }
    BoundedDegreeGraph::from_edges(n, d, &edges)
}

/// Path on `n` vertices, degree bound 2.
pub fn gen_path(n: usize) -> Result<BoundedDegreeGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Construction("path needs n >= 1".into()));
    }
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    BoundedDegreeGraph::from_edges(n, 2, &edges)
}

/// Cycle on `n >= 3` vertices, degree bound 2.
pub fn gen_cycle(n: usize) -> Result<BoundedDegreeGraph, GraphError> {
    if n < 3 {
        return Err(GraphError::Construction("cycle needs n >= 3".into()));
    }
    let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    edges.push((0, n - 1));
    BoundedDegreeGraph::from_edges(n, 2, &edges)
}

/// Two disjoint `len`-cycles (ids `0..len` and `len..2len`) joined by the
/// single bridge edge `(0, len)`. Degree bound 3.
pub fn gen_bridged_cycles(len: usize) -> Result<BoundedDegreeGraph, GraphError> {
    if len < 3 {
        return Err(GraphError::Construction("bridged cycles need len >= 3".into()));
    }
    let mut edges = Vec::with_capacity(2 * len + 1);
    for base in [0, len] {
        for i in 1..len {
            edges.push((base + i - 1, base + i));
        }
        edges.push((base, base + len - 1));
    }
    edges.push((0, len));
    BoundedDegreeGraph::from_edges(2 * len, 3, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> BoundedDegreeGraph {
        BoundedDegreeGraph::from_edges(3, 2, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn parses_path_and_cycle() {
        let g = BoundedDegreeGraph::parse_edge_list("3 2\n0 1\n1 2").unwrap();
        assert_eq!(g, p3());
        let c4 = BoundedDegreeGraph::parse_edge_list("4 2\n0 1\n1 2\n2 3\n0 3\n").unwrap();
        assert_eq!(c4.num_edges(), 4);
        assert_eq!(c4.neighbors(0), &[1, 3]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = BoundedDegreeGraph::parse_edge_list("2 1\n0 1\n0 1").unwrap_err();
        assert!(matches!(err, GraphError::Invalid { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("duplicate"));

        let err = BoundedDegreeGraph::parse_edge_list("3 1\n0 1\n1 2").unwrap_err();
        assert!(matches!(err, GraphError::Invalid { line: 3, .. }));
        assert!(err.to_string().contains("degree"));

        let err = BoundedDegreeGraph::parse_edge_list("3 2\n0 0").unwrap_err();
        assert!(matches!(err, GraphError::Invalid { line: 2, .. }));

        let err = BoundedDegreeGraph::parse_edge_list("3 2\n0 7").unwrap_err();
        assert!(err.to_string().contains("out of range"));

        let err = BoundedDegreeGraph::parse_edge_list("3 2\n0 x").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }));

        let err = BoundedDegreeGraph::parse_edge_list("3 2\n2 1").unwrap_err();
        assert!(matches!(err, GraphError::Invalid { line: 2, .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let g = BoundedDegreeGraph::parse_edge_list("# header\n\n3 2\n# edge\n0 1\n\n1 2\n").unwrap();
        assert_eq!(g, p3());
    }

    #[test]
    fn save_format_and_read_only_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c4.txt");
        let c4 = gen_cycle(4).unwrap();
        save_graph(&c4, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "4 2\n0 1\n0 3\n1 2\n2 3\n");
        assert_eq!(load_graph(&path).unwrap(), c4);

        let bad = dir.path().join("missing-dir").join("g.txt");
        assert!(matches!(save_graph(&c4, bad), Err(GraphError::Io { .. })));
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(gen_grid(1, 3).unwrap().edges().collect::<Vec<_>>(), p3().edges().collect::<Vec<_>>());
        let sq = gen_grid(2, 2).unwrap();
        assert_eq!(sq.num_edges(), 4);
        assert!((0..4).all(|v| sq.degree(v) == 2));
        let big = gen_grid(50, 50).unwrap();
        assert_eq!(big.num_vertices(), 2500);
        assert_eq!(big.num_edges(), 50 * 49 + 50 * 49);
        assert!(big.is_bipartite());
        assert!(gen_grid(0, 3).is_err());
        assert!(matches!(gen_grid(usize::MAX, 2), Err(GraphError::Overflow(_))));
    }

    #[test]
    fn triangulated_grid_shapes() {
        let g = gen_triangulated_grid(2, 2).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (4, 5));
        let g = gen_triangulated_grid(3, 3).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (9, 16));
        assert!(!gen_triangulated_grid(30, 30).unwrap().is_bipartite());
        assert!(gen_triangulated_grid(1, 5).is_err());
    }

    #[test]
    fn random_tree_contract() {
        assert_eq!(gen_random_tree(1, 3, 9).unwrap().num_edges(), 0);
        let path = gen_random_tree(5, 2, 1234).unwrap();
        assert_eq!(path.num_edges(), 4);
        assert!((0..5).all(|v| path.degree(v) <= 2));
        assert_eq!((0..5).filter(|&v| path.degree(v) == 1).count(), 2);
        let a = gen_random_tree(300, 3, 7).unwrap();
        let b = gen_random_tree(300, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random_tree(300, 3, 8).unwrap());
        assert!((0..300).all(|v| a.degree(v) <= 3));
    }

    #[test]
    fn bridged_cycles_shape() {
        let g = gen_bridged_cycles(4).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (8, 9));
        assert!(g.has_edge(0, 4));
        assert_eq!(g.degree(0), 3);
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = gen_cycle(6).unwrap();
        let sub = g.induced_subgraph(&[5, 0, 1]);
        assert_eq!(sub.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn vertex_set_ops() {
        let s: VertexSet = [5, 1, 3, 3].into_iter().collect();
        assert_eq!(s.as_slice(), &[1, 3, 5]);
        let t: VertexSet = [3, 4, 5].into_iter().collect();
        assert_eq!(s.intersection_count(&t), 2);
        assert!(!s.is_subset(&t));
        assert!(VertexSet::singleton(3).is_subset(&s));
    }
}
