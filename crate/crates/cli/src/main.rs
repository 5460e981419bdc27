//! `gewp`: seeded experiments on erased-word processes.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on
//! configuration or I/O errors.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gewp::Alphabet;

use config::ExperimentConfig;
use report::{Artifacts, RunReport};

const DEFAULT_OUT: &str = "gewp-out";

#[derive(Parser)]
#[command(name = "gewp", version, about = "Seeded experiments on erased-word processes")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Replace the configured seed list, e.g. `--seed-override 7` or `--seed-override 1,2,3`.
    #[arg(long, global = true, value_delimiter = ',', value_name = "SEEDS")]
    seed_override: Option<Vec<u64>>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density of a word in every line of a corpus.
    Density {
        #[arg(long, value_name = "PATH")]
        corpus: PathBuf,
        /// Word literal, tokens separated by spaces.
        #[arg(long)]
        word: String,
        /// Alphabet symbols separated by spaces; defaults to the config alphabet.
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Simulate trajectories, check their invariants and write checkpoints.
    Simulate,
    /// Convergence to the directing measure and the certified coupling bound.
    Boundary,
    /// Innovation identities and reconstruction from innovation tails.
    Filtration,
    /// CSV data for lattice-path pictures (binary alphabets only).
    Plotdata,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let Some(path) = &cli.config else {
        bail!("this command needs --config PATH");
    };
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seeds) = &cli.seed_override {
        cfg.override_seeds(seeds.clone()).context("--seed-override")?;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
        .unwrap_or_else(|| Path::new(DEFAULT_OUT).to_path_buf())
}

fn run(cli: &Cli) -> Result<RunReport> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match &cli.command {
        Command::Density { corpus, word, alphabet } => {
            let alphabet = match (alphabet, &cli.config) {
                (Some(a), _) => Alphabet::new(a.split_whitespace())?,
                (None, Some(_)) => load_config(cli)?.alphabet()?,
                (None, None) => bail!("density needs --alphabet or --config to resolve letter tokens"),
            };
            let art = cli.out.as_deref().map(Artifacts::new).transpose()?;
            commands::density::run(corpus, word, &alphabet, art)
        }
        cmd => {
            let cfg = load_config(cli)?;
            let art = Artifacts::new(&out_dir(cli, Some(&cfg)))?;
            match cmd {
                Command::Simulate => commands::simulate::run(&cfg, art),
                Command::Boundary => commands::boundary::run(&cfg, art),
                Command::Filtration => commands::filtration::run(&cfg, art),
                Command::Plotdata => commands::plotdata::run(&cfg, art),
                Command::Density { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.summary());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
