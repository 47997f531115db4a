//! Property testing and additive estimation on top of the partition oracle.
//!
//! Both work piece by piece: a sampled vertex's piece is pulled out as an
//! induced subgraph and handed to an exact per-piece routine.

pub mod solvers;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::Mass;
use crate::graph::{BoundedDegreeGraph, VertexSet};
use crate::oracle::{ParamError, PartitionOracle, Purpose, SeedContext};

pub use solvers::SolverError;

/// Decides membership of a single piece.
pub trait ComponentDecider: Sync {
    fn decide(&self, piece: &BoundedDegreeGraph) -> Result<bool, SolverError>;
}

/// Scores a single piece; the graph-level value is the sum over pieces.
pub trait ComponentScorer: Sync {
    fn score(&self, piece: &BoundedDegreeGraph) -> Result<f64, SolverError>;
}

impl<F> ComponentDecider for F
where
    F: Fn(&BoundedDegreeGraph) -> Result<bool, SolverError> + Sync,
{
    fn decide(&self, piece: &BoundedDegreeGraph) -> Result<bool, SolverError> {
        self(piece)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Bipartite,
    TriangleFree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scorer {
    Matching,
    VertexCover,
    IndependentSet,
    DominatingSet,
    /// Vertex count; the estimate should come out at exactly `n`.
    Size,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown {kind} {name:?}; known: {known}")]
pub struct RegistryError {
    pub kind: &'static str,
    pub name: String,
    pub known: &'static str,
}

impl FromStr for Property {
    type Err = RegistryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bipartite" => Ok(Self::Bipartite),
            "triangle-free" => Ok(Self::TriangleFree),
            _ => Err(RegistryError { kind: "property", name: s.into(), known: "bipartite, triangle-free" }),
        }
    }
}

impl FromStr for Scorer {
    type Err = RegistryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "matching" => Ok(Self::Matching),
            "vertex-cover" => Ok(Self::VertexCover),
            "independent-set" => Ok(Self::IndependentSet),
            "dominating-set" => Ok(Self::DominatingSet),
            "size" => Ok(Self::Size),
            _ => Err(RegistryError {
                kind: "scorer",
                name: s.into(),
                known: "matching, vertex-cover, independent-set, dominating-set, size",
            }),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bipartite => "bipartite",
            Self::TriangleFree => "triangle-free",
        })
    }
}

impl fmt::Display for Scorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Matching => "matching",
            Self::VertexCover => "vertex-cover",
            Self::IndependentSet => "independent-set",
            Self::DominatingSet => "dominating-set",
            Self::Size => "size",
        })
    }
}

/// A registry entry bound to a piece-size cap.
#[derive(Clone, Copy, Debug)]
pub struct Capped<T> {
    pub inner: T,
    pub cap: usize,
}

impl ComponentDecider for Capped<Property> {
    fn decide(&self, piece: &BoundedDegreeGraph) -> Result<bool, SolverError> {
        solvers::check_cap(piece, self.cap)?;
        Ok(match self.inner {
            Property::Bipartite => solvers::is_bipartite(piece),
            Property::TriangleFree => solvers::is_triangle_free(piece),
        })
    }
}

impl ComponentScorer for Capped<Scorer> {
    fn score(&self, piece: &BoundedDegreeGraph) -> Result<f64, SolverError> {
        solvers::check_cap(piece, self.cap)?;
        let v = match self.inner {
            Scorer::Matching => solvers::max_matching(piece),
            Scorer::VertexCover => solvers::min_vertex_cover(piece)?,
            Scorer::IndependentSet => solvers::max_independent_set(piece)?,
            Scorer::DominatingSet => solvers::min_dominating_set(piece)?,
            Scorer::Size => piece.num_vertices(),
        };
        Ok(v as f64)
    }
}

fn induced(g: &BoundedDegreeGraph, piece: &VertexSet) -> BoundedDegreeGraph {
    g.induced_subgraph(piece.as_slice())
}

/// Share of `(uniform vertex, uniform neighbor)` probes whose endpoints lie
/// in different pieces. Probes from isolated vertices count as uncut.
pub fn estimate_cut_fraction<M: Mass>(oracle: &PartitionOracle<'_, M>, samples: usize, stream: u32) -> f64 {
    let g = oracle.graph();
    let n = g.num_vertices();
    if n == 0 || samples == 0 {
        return 0.0;
    }
    oracle.thresholds();
    let ctx = oracle.ctx();
    let cut: usize = (0..samples as u64)
        .into_par_iter()
        .filter(|&i| {
            let u = ctx.draw_below(Purpose::CutProbe, stream, 2 * i, n);
            let nbrs = g.neighbors(u);
            if nbrs.is_empty() {
                return false;
            }
            let w = nbrs[ctx.draw_below(Purpose::CutProbe, stream, 2 * i + 1, nbrs.len())];
            oracle.find_anchor(u) != oracle.find_anchor(w)
        })
        .count();
    cut as f64 / samples as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TesterConfig {
    /// Seeds tried before giving up on the cut estimate.
    pub retries: usize,
    /// Cut probes per seed are `⌈probe_factor / ε⌉`.
    pub probe_factor: f64,
    /// Sampled vertices are `⌈sample_factor / ε⌉`.
    pub sample_factor: f64,
    /// A seed passes when its estimated probe cut share is at most this.
    pub cut_threshold: f64,
    pub piece_cap: usize,
}

impl TesterConfig {
    /// Threshold `ε/4`, as in the asymptotic analysis.
    pub fn new(epsilon: f64) -> Self {
        Self { retries: 8, probe_factor: 48.0, sample_factor: 8.0, cut_threshold: epsilon / 4.0, piece_cap: 64 }
    }

    pub fn probes(&self, epsilon: f64) -> usize {
        (self.probe_factor / epsilon).ceil() as usize
    }

    pub fn samples(&self, epsilon: f64) -> usize {
        (self.sample_factor / epsilon).ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedAttempt {
    pub seed: u64,
    pub cut_estimate: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub verdict: Verdict,
    pub attempts: Vec<SeedAttempt>,
    /// Vertices sampled in the piece-checking phase.
    pub sampled: Vec<usize>,
    /// First sampled vertex whose piece failed the decider.
    pub failing_vertex: Option<usize>,
    pub failing_piece: Option<VertexSet>,
}

/// Seed used for attempt `i` of a run keyed by `ctx`.
pub fn attempt_seed(ctx: &SeedContext, i: usize) -> u64 {
    ctx.draw_u64(Purpose::Reseed, 0, i as u64)
}

/// Two-phase tester. Seeds are retried until one yields a partition whose
/// estimated cut share is within the threshold (reject if none does); then
/// sampled vertices' pieces are checked and any failing piece rejects.
pub fn test_property<M: Mass>(
    g: &BoundedDegreeGraph,
    ctx: &SeedContext,
    epsilon: f64,
    decider: &dyn ComponentDecider,
    cfg: &TesterConfig,
) -> Result<TestReport, ApplicationError> {
    let n = g.num_vertices();
    let mut attempts = Vec::new();
    for i in 0..cfg.retries {
        let seed = attempt_seed(ctx, i);
        let oracle = PartitionOracle::<M>::new(g, ctx.with_seed(seed))?;
        let est = estimate_cut_fraction(&oracle, cfg.probes(epsilon), 0);
        let passed = est <= cfg.cut_threshold;
        attempts.push(SeedAttempt { seed, cut_estimate: est, passed });
        if !passed {
            continue;
        }
        let ac = oracle.ctx();
        let sampled: Vec<usize> = if n == 0 {
            Vec::new()
        } else {
            (0..cfg.samples(epsilon) as u64).map(|j| ac.draw_below(Purpose::TesterSample, 0, j, n)).collect()
        };
        let verdicts: Vec<(usize, VertexSet, bool)> = sampled
            .par_iter()
            .map(|&v| {
                let piece = oracle.find_partition(v);
                let ok = decider.decide(&induced(g, &piece))?;
                Ok((v, piece, ok))
            })
            .collect::<Result<_, SolverError>>()?;
        let failing = verdicts.into_iter().find(|r| !r.2);
        return Ok(TestReport {
            verdict: if failing.is_some() { Verdict::Reject } else { Verdict::Accept },
            attempts,
            sampled,
            failing_vertex: failing.as_ref().map(|f| f.0),
            failing_piece: failing.map(|f| f.1),
        });
    }
    Ok(TestReport {
        verdict: Verdict::Reject,
        attempts,
        sampled: Vec::new(),
        failing_vertex: None,
        failing_piece: None,
    })
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ApplicationError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    /// `n · sd / √samples` of the per-sample terms.
    pub stderr_proxy: f64,
    pub samples: usize,
    pub seed: u64,
}

/// `(n / samples) · Σ score(piece(v)) / |piece(v)|` over uniform vertices.
pub fn estimate_additive<M: Mass>(
    oracle: &PartitionOracle<'_, M>,
    scorer: &dyn ComponentScorer,
    samples: usize,
) -> Result<Estimate, SolverError> {
    let g = oracle.graph();
    let n = g.num_vertices();
    let seed = oracle.ctx().master_seed();
    if n == 0 || samples == 0 {
        return Ok(Estimate { estimate: 0.0, stderr_proxy: 0.0, samples, seed });
    }
    oracle.thresholds();
    let ctx = oracle.ctx();
    let terms: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let v = ctx.draw_below(Purpose::EstimatorSample, 0, i, n);
            let piece = oracle.find_partition(v);
            Ok(scorer.score(&induced(g, &piece))? / piece.len() as f64)
        })
        .collect::<Result<_, SolverError>>()?;
    let mean = terms.iter().sum::<f64>() / samples as f64;
    let var =
        if samples > 1 { terms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64 } else { 0.0 };
    Ok(Estimate { estimate: n as f64 * mean, stderr_proxy: n as f64 * (var / samples as f64).sqrt(), samples, seed })
}

/// Sum of scores over every piece: the value the estimator targets.
pub fn total_over_pieces<M: Mass>(
    oracle: &PartitionOracle<'_, M>,
    scorer: &dyn ComponentScorer,
) -> Result<f64, SolverError> {
    let g = oracle.graph();
    let pieces = oracle.local_partition().pieces(g);
    pieces.par_iter().map(|p| scorer.score(&induced(g, p))).sum()
}
