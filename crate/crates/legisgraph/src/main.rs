//! Thin command-line front end: each subcommand maps onto one pipeline
//! stage (see the library's `pipeline` module).
//!
//! Exit codes: 0 success, 1 config error, 2 data error, 3 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use legisgraph::corpus::synthetic::{generate, SyntheticSpec};
use legisgraph::corpus::{write_snapshot, CorpusError};
use legisgraph::pipeline::{
    fetch_uscode_titles, run_stage, PipelineConfig, PipelineError, Stage,
};

#[derive(Parser)]
#[command(name = "legisgraph", version, about = "Legislative corpora as document networks")]
struct Cli {
    /// Pipeline configuration file (TOML or JSON).
    #[arg(short, long, global = true, default_value = "config.toml")]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    output_dir: Option<String>,
    /// Override clustering.runs.
    #[arg(long, global = true)]
    runs: Option<u32>,
    /// Override clustering.preferred_n (0 lets the optimizer decide).
    #[arg(long, global = true)]
    preferred_n: Option<u32>,
    /// Override clustering.seed_base.
    #[arg(long, global = true)]
    seed_base: Option<u64>,
    /// Override clustering.threshold.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Override dynamics.gamma.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn apply_overrides(&self, config: &mut PipelineConfig) {
        if let Some(dir) = &self.output_dir {
            config.output_dir = dir.clone();
        }
        if let Some(runs) = self.runs {
            config.clustering.runs = runs;
        }
        if let Some(n) = self.preferred_n {
            config.clustering.preferred_n = if n == 0 { None } else { Some(n) };
        }
        if let Some(seed) = self.seed_base {
            config.clustering.seed_base = seed;
        }
        if let Some(t) = self.threshold {
            config.clustering.threshold = t;
        }
        if let Some(g) = self.gamma {
            config.dynamics.gamma = g;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Download US Code annual archives into a cache directory.
    Fetch {
        /// Years to fetch (1994–2018).
        #[arg(long, required = true, num_args = 1..)]
        years: Vec<u16>,
        /// Cache directory (defaults to $LEGISGRAPH_CACHE or ./cache).
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Restrict to specific title numbers.
        #[arg(long, num_args = 1..)]
        titles: Option<Vec<u8>>,
    },
    /// Generate a corpus in canonical form via an importer.
    Ingest {
        /// Importer name (only `synthetic` ships with the library).
        #[arg(long, default_value = "synthetic")]
        importer: String,
        /// Importer input (for `synthetic`: a spec JSON file).
        #[arg(long)]
        input: PathBuf,
        /// Directory for the canonical XML and manifests.
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract cross-references (CSV + report per year).
    Extract,
    /// Build hierarchy/reference/sequence/subsequence/quotient graphs.
    Graph,
    /// Consensus clustering per year.
    Cluster,
    /// Align nodes between adjacent years.
    Align,
    /// Cluster graph, family graph, and cluster families.
    Dynamics,
    /// Growth, per-unit, and regression statistics.
    Stats,
    /// Figure data: alluvial, quotient visualizations, family report.
    Export,
    /// Run the whole pipeline.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let stage = match cli.command {
        Command::Fetch {
            years,
            cache_dir,
            titles,
        } => {
            let cache = cache_dir.unwrap_or_else(|| {
                std::env::var_os("LEGISGRAPH_CACHE")
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("cache"))
            });
            let titles = titles.unwrap_or_else(|| (1..=54).collect());
            let report = fetch_uscode_titles(&years, &titles, &cache).map_err(|e| match e {
                legisgraph::pipeline::UscodeError::Validation(m) => PipelineError::Config(m),
                other => PipelineError::Stage {
                    stage: "fetch",
                    message: other.to_string(),
                    data: true,
                },
            })?;
            let cached = report.entries.iter().filter(|e| e.cached).count();
            println!(
                "fetched {} files ({cached} cached, {} missing)",
                report.entries.len(),
                report.missing.len()
            );
            return Ok(());
        }
        Command::Ingest {
            importer,
            input,
            out,
        } => {
            if importer != "synthetic" {
                return Err(PipelineError::Config(format!(
                    "unknown importer {importer}; only `synthetic` is built in"
                )));
            }
            let raw = std::fs::read_to_string(&input).map_err(|e| PipelineError::Io {
                path: input.display().to_string(),
                source: e,
            })?;
            let spec: SyntheticSpec = serde_json::from_str(&raw)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", input.display())))?;
            let corpus = generate(&spec);
            let io_err = |e: CorpusError| PipelineError::Stage {
                stage: "ingest",
                message: e.to_string(),
                data: true,
            };
            for snapshot in &corpus.snapshots {
                let manifest = write_snapshot(snapshot, &out).map_err(io_err)?;
                println!("wrote {}", manifest.display());
            }
            return Ok(());
        }
        Command::Extract => Stage::Extract,
        Command::Graph => Stage::Graph,
        Command::Cluster => Stage::Cluster,
        Command::Align => Stage::Align,
        Command::Dynamics => Stage::Dynamics,
        Command::Stats => Stage::Stats,
        Command::Export => Stage::Export,
        Command::All => Stage::All,
    };
    let mut config = PipelineConfig::load(&cli.config)?;
    cli.apply_overrides(&mut config);
    config.validate()?;
    let base = cli
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let files = run_stage(&config, &base, stage)?;
    println!(
        "wrote {} files under {}",
        files.len(),
        config.output_path(&base).display()
    );
    Ok(())
}
