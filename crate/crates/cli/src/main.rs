#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
    Io(String),
    CriterionFailure(Vec<u8>),
}

impl RunError {
    fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) | RunError::Io(_) => 3,
            RunError::CriterionFailure(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
            RunError::CriterionFailure(ids) => write!(f, "failed criteria: {ids:?}"),
        }
    }
}

impl From<hypstab_core::Error> for RunError {
    fn from(e: hypstab_core::Error) -> Self {
        match e {
            hypstab_core::Error::InvalidInput(_) | hypstab_core::Error::BadParameter(_) => {
                RunError::Config(e.to_string())
            }
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "hypstab", version, about = "Run stability functional scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a config file.
    Run {
        config: PathBuf,
        /// Output root directory.
        #[arg(long, env = "HYPSTAB_OUT", default_value = "hypstab-out")]
        out: PathBuf,
        /// Replaces the seed of every generator and calibration sweep.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for scenario batches.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn run(config: PathBuf, out: PathBuf, seed: Option<u64>, jobs: Option<usize>) -> Result<(), RunError> {
    let scenarios = config::load(&config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(RunError::Config("--jobs must be positive".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| RunError::Config(e.to_string()))?;
    let mut labels: Vec<String> = scenarios.iter().enumerate().map(|(i, s)| s.label(i)).collect();
    labels.sort();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(RunError::Config("scenario names must be unique".into()));
    }
    let results: Vec<Result<(), RunError>> = pool.install(|| {
        scenarios
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let dir = match &s.out {
                    Some(p) => out.join(p),
                    None if scenarios.len() == 1 => out.clone(),
                    None => out.join(s.label(i)),
                };
                let res = tasks::run_scenario(s, &dir, seed);
                if let Err(e) = &res {
                    eprintln!("{}: {e}", s.label(i));
                }
                res
            })
            .collect()
    });
    // the most severe outcome decides the exit code: numerical, config, criteria
    let mut failed = Vec::new();
    let mut worst: Option<RunError> = None;
    for r in results {
        match r {
            Ok(()) => {}
            Err(RunError::CriterionFailure(ids)) => failed.extend(ids),
            Err(e) => {
                let rank = |e: &RunError| match e {
                    RunError::Numerical(_) | RunError::Io(_) => 2,
                    _ => 1,
                };
                if worst.as_ref().is_none_or(|w| rank(&e) > rank(w)) {
                    worst = Some(e);
                }
            }
        }
    }
    match worst {
        Some(e) => Err(e),
        None if !failed.is_empty() => Err(RunError::CriterionFailure(failed)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        config,
        out,
        seed,
        jobs,
    } = cli.command;
    match run(config, out, seed, jobs) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hypstab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
