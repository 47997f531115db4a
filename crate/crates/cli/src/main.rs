use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use partition_oracle::oracle::ParamMode;
use po_cli::commands::{self, CensusKind, CensusOptions, FreeChoice, Outcome};
use po_cli::{RunConfig, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "po", version, about = "Local partition oracle for bounded-degree graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command that runs the oracle. Each one overrides
/// the matching field of `--config`.
#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge-list graph file.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    mode: Option<ParamMode>,
    /// Parameter override, e.g. `--set rho=0.001`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VAL")]
    overrides: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(g) = &self.graph {
            c.graph = Some(g.clone());
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(e) = self.eps {
            c.epsilon = e;
        }
        if let Some(m) = self.mode {
            c.mode = m;
        }
        for o in &self.overrides {
            c.set(o)?;
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as an edge list.
    Gen {
        /// grid, tri-grid, tree, path, cycle or bridge.
        kind: String,
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partition every vertex and report the cut.
    Partition {
        #[command(flatten)]
        common: Common,
        /// Use the global reference run instead of local queries.
        #[arg(long)]
        global: bool,
        /// Also run the other path and fail unless both agree.
        #[arg(long)]
        verify: bool,
    },
    /// Piece containing one vertex.
    Query {
        v: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Property tester. Exit status 3 on reject.
    Test {
        /// bipartite or triangle-free.
        property: String,
        #[command(flatten)]
        common: Common,
    },
    /// Additive estimate of a per-piece score.
    Estimate {
        /// matching, vertex-cover, independent-set, dominating-set or size.
        scorer: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Exhaustive census as CSV.
    Census {
        #[arg(value_enum)]
        kind: CensusKind,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        phase: usize,
        #[arg(long, value_enum, default_value_t = FreeChoice::Global)]
        free: FreeChoice,
        /// Leaky census of a single source.
        #[arg(long)]
        source: Option<usize>,
        /// Viability over every active seed instead of the finder's sample.
        #[arg(long)]
        all_seeds: bool,
        /// Lift the desk-scale size cap.
        #[arg(long)]
        force: bool,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn run(cli: Cli) -> Result<u8> {
    let (outcome, out): (Outcome, Option<PathBuf>) = match cli.command {
        Command::Gen { kind, dims, seed, out } => {
            let g = commands::generate(&kind, &dims, seed)?;
            (Outcome { text: g.to_edge_list(), exit: 0 }, out)
        }
        Command::Partition { common, global, verify } => {
            (commands::partition(&common.resolve()?, global, verify)?, common.out)
        }
        Command::Query { v, common } => (commands::query(&common.resolve()?, v)?, common.out),
        Command::Test { property, common } => (commands::test(&common.resolve()?, &property)?, common.out),
        Command::Estimate { scorer, common, samples } => {
            let mut c = common.resolve()?;
            if let Some(s) = samples {
                c.estimator.samples = s;
            }
            (commands::estimate(&c, &scorer)?, common.out)
        }
        Command::Census { kind, common, phase, free, source, all_seeds, force } => {
            let opts = CensusOptions { kind, phase, free, source, all_seeds, force };
            (commands::census(&common.resolve()?, &opts)?, common.out)
        }
    };
    emit(&outcome.text, out.as_ref())?;
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("PO_THREADS").ok().and_then(|t| t.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("po: cannot size thread pool: {e}");
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("po: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
