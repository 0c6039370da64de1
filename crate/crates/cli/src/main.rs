use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hsearch_cli::{commands, synth, Overrides, RunConfig, SearchMode};

#[derive(Parser)]
#[command(name = "hsearch", version, about = "Hybrid lexical + vector search over review corpora")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    index_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    eval_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a review corpus into train/validation/test files.
    Ingest,
    /// Build and persist the lexical and vector indexes.
    Index,
    /// Query the indexes; results are JSON lines on stdout.
    Search {
        query: String,
        #[arg(long, value_enum)]
        mode: Option<SearchMode>,
        /// Lexical weight for hybrid fusion, in [0, 1].
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        /// Print whole documents instead of 80-character snippets.
        #[arg(long)]
        full: bool,
    },
    /// Score a predictions file (`{"y_true":..,"y_pred":..}` per line).
    Eval { predictions: PathBuf },
    /// Write a deterministic synthetic review corpus.
    Synth {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut overrides = Overrides {
        seed: cli.seed,
        corpus: cli.corpus,
        data_dir: cli.data_dir,
        index_dir: cli.index_dir,
        eval_dir: cli.eval_dir,
        ..Default::default()
    };
    if let Command::Search { mode, alpha, k, full, .. } = &cli.command {
        overrides.mode = *mode;
        overrides.alpha = *alpha;
        overrides.k = *k;
        overrides.full = *full;
    }
    let cfg = RunConfig::resolve(cli.config.as_deref(), &overrides)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Ingest => commands::ingest(&cfg, &mut out).map(drop),
        Command::Index => commands::index(&cfg, &mut out).map(drop),
        Command::Search { query, .. } => commands::search(&cfg, &query, &mut out).map(drop),
        Command::Eval { predictions } => commands::eval(&cfg, &predictions, &mut out).map(drop),
        Command::Synth { n, out: path } => {
            let mut buf = Vec::new();
            synth::write_corpus(&mut buf, n, cfg.seed)?;
            hsearch_core::io::write_atomic(&path, |w| w.write_all(&buf))
                .with_context(|| format!("writing {}", path.display()))
        }
    }?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
