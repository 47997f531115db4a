//! Subcommand implementations. Each returns its report as text so the binary
//! only decides where it goes.

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use partition_oracle::analysis::{
    differential_check_with, good_seed_census, leaky_census, measure_cut, viability_census, CensusSeeds, CutReport,
};
use partition_oracle::applications::{
    estimate_additive, test_property, Capped, Estimate, Property, Scorer, TestReport, Verdict,
};
use partition_oracle::graph::{
    gen_bridged_cycles, gen_cycle, gen_grid, gen_path, gen_random_tree, gen_triangulated_grid,
};
use partition_oracle::oracle::{global_run, PhaseThresholds, WorkStats};
use partition_oracle::{BoundedDegreeGraph, OracleParams, Partition, PartitionOracle, SeedContext, VertexSet};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_REJECT: u8 = 3;

/// Text produced by a command together with its exit status.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub exit: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, exit: EXIT_OK }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: Value,
    config: &'a RunConfig,
    config_sha256: String,
    graph_sha256: &'a str,
    result: T,
}

fn render<T: Serialize>(command: Value, config: &RunConfig, graph: &Loaded, result: T) -> Result<String> {
    let report = Report { command, config, config_sha256: config.hash(), graph_sha256: &graph.sha256, result };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    Ok(text)
}

struct Loaded {
    graph: BoundedDegreeGraph,
    sha256: String,
}

fn load(config: &RunConfig) -> Result<Loaded> {
    let path = config.graph_path()?;
    let bytes = fs::read(path).with_context(|| format!("reading graph {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("graph {} is not UTF-8", path.display()))?;
    let graph =
        BoundedDegreeGraph::parse_edge_list(text).with_context(|| format!("parsing graph {}", path.display()))?;
    Ok(Loaded { graph, sha256: hex::encode(Sha256::digest(&bytes)) })
}

fn context(config: &RunConfig, g: &BoundedDegreeGraph) -> Result<SeedContext> {
    Ok(SeedContext::new(config.seed, config.oracle_params(g.degree_bound())?))
}

/// Builds a generator graph. `dims` are the positional sizes of `kind`.
pub fn generate(kind: &str, dims: &[usize], seed: u64) -> Result<BoundedDegreeGraph> {
    let need = |count: usize, usage: &str| -> Result<()> {
        ensure!(dims.len() == count, "gen {kind} expects {usage}");
        Ok(())
    };
    let g = match kind {
        "grid" => {
            need(2, "ROWS COLS")?;
            gen_grid(dims[0], dims[1])?
        }
        "tri-grid" => {
            need(2, "ROWS COLS")?;
            gen_triangulated_grid(dims[0], dims[1])?
        }
        "tree" => {
            // The seed may be given positionally as a third number.
            ensure!(dims.len() == 2 || dims.len() == 3, "gen tree expects N D [SEED]");
            let seed = dims.get(2).map_or(seed, |&s| s as u64);
            gen_random_tree(dims[0], dims[1], seed)?
        }
        "path" => {
            need(1, "N")?;
            gen_path(dims[0])?
        }
        "cycle" => {
            need(1, "N")?;
            gen_cycle(dims[0])?
        }
        "bridge" => {
            need(1, "CYCLE_LEN")?;
            gen_bridged_cycles(dims[0])?
        }
        other => bail!("unknown generator {other:?} (expected grid, tri-grid, tree, path, cycle or bridge)"),
    };
    Ok(g)
}

#[derive(Serialize)]
struct PartitionResult {
    params: OracleParams,
    thresholds: PhaseThresholds,
    pieces: usize,
    anchors: Vec<usize>,
    cut: CutReport,
}

/// Partitions every vertex, through the local oracle or the global run.
/// With `verify` the other path is computed too and any disagreement is an
/// error.
pub fn partition(config: &RunConfig, global: bool, verify: bool) -> Result<Outcome> {
    let loaded = load(config)?;
    let g = &loaded.graph;
    let ctx = context(config, g)?;
    let run_global = || {
        let run = global_run::<f64>(g, &ctx);
        (run.partition, run.thresholds)
    };
    let oracle = PartitionOracle::<f64>::new(g, ctx.clone())?;
    let run_local = || (oracle.local_partition(), oracle.thresholds().clone());
    let (part, thresholds): (Partition, PhaseThresholds) = if global { run_global() } else { run_local() };
    if verify {
        let (other, other_thresholds) = if global { run_local() } else { run_global() };
        ensure!(
            other_thresholds == thresholds,
            "local and global thresholds differ: {:?} vs {:?}",
            thresholds.as_slice(),
            other_thresholds.as_slice()
        );
        if other != part {
            let global_part = if global { &part } else { &other };
            let report = differential_check_with(g, global_part, |v| oracle.find_partition(v));
            match report.divergence {
                Some(d) => bail!(
                    "local and global partitions differ at vertex {}: local {:?}, global {:?}",
                    d.v,
                    d.local.as_slice(),
                    d.global.as_slice()
                ),
                None => bail!("local and global partitions differ in anchor labels"),
            }
        }
    }
    let result = PartitionResult {
        params: ctx.params().clone(),
        thresholds,
        pieces: part.pieces(g).len(),
        anchors: part.anchors().to_vec(),
        cut: measure_cut(g, &part, config.epsilon),
    };
    Ok(Outcome::ok(render(json!({ "name": "partition" }), config, &loaded, result)?))
}

#[derive(Serialize)]
struct QueryResult {
    v: usize,
    anchor: usize,
    piece: VertexSet,
    piece_size: usize,
    thresholds: PhaseThresholds,
    work: WorkStats,
}

/// Answers one vertex query. Wall time goes to stderr so the JSON stays
/// reproducible.
pub fn query(config: &RunConfig, v: usize) -> Result<Outcome> {
    let loaded = load(config)?;
    let g = &loaded.graph;
    let n = g.num_vertices();
    ensure!(v < n, "vertex {v} out of range (graph has {n} vertices)");
    let oracle = PartitionOracle::<f64>::new(g, context(config, g)?)?;
    let start = Instant::now();
    let piece = oracle.find_partition(v);
    eprintln!("query {v}: {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
    let result = QueryResult {
        v,
        anchor: oracle.find_anchor(v),
        piece_size: piece.len(),
        piece,
        thresholds: oracle.thresholds().clone(),
        work: oracle.stats(),
    };
    Ok(Outcome::ok(render(json!({ "name": "query", "v": v }), config, &loaded, result)?))
}

#[derive(Serialize)]
struct TestResult {
    property: String,
    #[serde(flatten)]
    report: TestReport,
}

/// Runs the property tester; a reject verdict exits with status 3.
pub fn test(config: &RunConfig, property: &str) -> Result<Outcome> {
    let prop: Property = property.parse()?;
    let loaded = load(config)?;
    let g = &loaded.graph;
    let cfg = config.tester_config();
    let decider = Capped { inner: prop, cap: cfg.piece_cap };
    let report = test_property::<f64>(g, &context(config, g)?, config.epsilon, &decider, &cfg)?;
    let exit = if report.verdict == Verdict::Reject { EXIT_REJECT } else { EXIT_OK };
    let result = TestResult { property: prop.to_string(), report };
    let text = render(json!({ "name": "test", "property": prop.to_string() }), config, &loaded, result)?;
    Ok(Outcome { text, exit })
}

#[derive(Serialize)]
struct EstimateResult {
    scorer: String,
    #[serde(flatten)]
    estimate: Estimate,
}

pub fn estimate(config: &RunConfig, scorer: &str) -> Result<Outcome> {
    let sc: Scorer = scorer.parse()?;
    let loaded = load(config)?;
    let g = &loaded.graph;
    let oracle = PartitionOracle::<f64>::new(g, context(config, g)?)?;
    let capped = Capped { inner: sc, cap: config.estimator.piece_cap };
    let estimate = estimate_additive(&oracle, &capped, config.estimator.samples)?;
    let result = EstimateResult { scorer: sc.to_string(), estimate };
    Ok(Outcome::ok(render(json!({ "name": "estimate", "scorer": sc.to_string() }), config, &loaded, result)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CensusKind {
    /// `(h, k)`-viability of the finder's seeds (or all active seeds).
    Viability,
    /// Leaking timesteps of every source (or one).
    Leaky,
    /// Seeds whose diffusion keeps enough mass on the free set.
    GoodSeeds,
}

/// Free set a census is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FreeChoice {
    /// `F_h` of the reference global run.
    Global,
    Empty,
    All,
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    pub kind: CensusKind,
    pub phase: usize,
    pub free: FreeChoice,
    pub source: Option<usize>,
    pub all_seeds: bool,
    pub force: bool,
}

/// Exhaustive census as CSV.
pub fn census(config: &RunConfig, opts: &CensusOptions) -> Result<Outcome> {
    let loaded = load(config)?;
    let g = &loaded.graph;
    let n = g.num_vertices();
    ensure!(
        opts.force || n <= config.census.max_n,
        "census on {n} vertices exceeds the desk-scale cap of {} (use --force)",
        config.census.max_n
    );
    let ctx = context(config, g)?;
    let p = ctx.params();
    ensure!(opts.phase >= 1 && opts.phase <= p.h_bar, "phase {} outside 1..={}", opts.phase, p.h_bar);
    let free = match opts.free {
        FreeChoice::Global => VertexSet::from_sorted(global_run::<f64>(g, &ctx).free_set(opts.phase)),
        FreeChoice::Empty => VertexSet::new(),
        FreeChoice::All => VertexSet::from_sorted((0..n).collect()),
    };
    let mut out = csv::Writer::from_writer(Vec::new());
    match opts.kind {
        CensusKind::Viability => {
            let seeds = if opts.all_seeds { CensusSeeds::AllActive } else { CensusSeeds::FinderSample };
            let r = viability_census::<f64>(g, &ctx, opts.phase, &free, &p.k_candidates, seeds);
            let mut mult = BTreeMap::new();
            for &s in &r.seeds {
                *mult.entry(s).or_insert(0usize) += 1;
            }
            for row in r.rows {
                out.serialize(ViabilityCsv {
                    s: row.s,
                    multiplicity: mult[&row.s],
                    k: row.k,
                    cluster_size: row.cluster_size,
                    free_overlap: row.free_overlap,
                    viable: row.viable,
                })?;
            }
        }
        CensusKind::Leaky => {
            let sources: Vec<usize> = match opts.source {
                Some(s) => {
                    ensure!(s < n, "source {s} out of range (graph has {n} vertices)");
                    vec![s]
                }
                None => (0..n).collect(),
            };
            let reports: Vec<_> = sources.par_iter().map(|&s| leaky_census::<f64>(g, p, s, &free)).collect();
            for row in reports.into_iter().flat_map(|r| r.rows) {
                out.serialize(LeakyCsv {
                    s: row.s,
                    t: row.t,
                    leaking: row.leaking,
                    certificate_k: row.certificate_k,
                    conductance: row.conductance,
                })?;
            }
        }
        CensusKind::GoodSeeds => {
            let r = good_seed_census::<f64>(g, p, &free);
            for s in free.iter() {
                out.serialize(GoodSeedCsv { s, good: r.good_seeds.binary_search(&s).is_ok() })?;
            }
        }
    }
    let bytes = out.into_inner().map_err(|e| e.into_error())?;
    Ok(Outcome::ok(String::from_utf8(bytes)?))
}

#[derive(Serialize)]
struct ViabilityCsv {
    s: usize,
    multiplicity: usize,
    k: usize,
    cluster_size: usize,
    free_overlap: usize,
    viable: bool,
}

#[derive(Serialize)]
struct LeakyCsv {
    s: usize,
    t: usize,
    leaking: bool,
    certificate_k: Option<usize>,
    conductance: Option<f64>,
}

#[derive(Serialize)]
struct GoodSeedCsv {
    s: usize,
    good: bool,
}
