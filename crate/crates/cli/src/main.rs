//! `crossloop`: runs one experiment from a JSON run config and writes its
//! CSV, JSON and SVG artifacts.
//!
//! Exit status: 0 on success, 2 for an invalid config or input, 3 for a
//! violated runtime invariant, 4 for an I/O failure. A failed run leaves no
//! artifacts behind.

mod commands;
mod config;
mod json;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use crate::commands::{Artifact, Header};
use crate::config::*;

/// Why a run failed; each kind has its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Schema(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Library errors are invariant violations when they signal a defect,
    /// and input errors otherwise.
    pub fn from_core(e: crossloop_core::Error) -> Self {
        if e.is_invariant_violation() {
            CliError::Invariant(e.to_string())
        } else {
            CliError::Schema(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "crossloop", version, about = "Loop decompositions, annulus crossings and Ising couplings")]
struct Args {
    /// The command to run; may instead be given as `command` in the config.
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON run config.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed, overriding the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (default: one per available core).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Output directory, overriding the config (default: current directory).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

/// A fully resolved run.
struct Run {
    command: Command,
    seed: u64,
    threads: usize,
    out: PathBuf,
    params: Option<serde_json::Value>,
}

fn resolve(args: &Args) -> Result<Run, CliError> {
    let cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let command = match (args.command, cfg.command) {
        (Some(a), Some(c)) if a != c => {
            return Err(CliError::Schema(format!("command {} conflicts with config command {}", a.name(), c.name())))
        }
        (Some(a), _) => a,
        (None, Some(c)) => c,
        (None, None) => return Err(CliError::Schema("no command given".into())),
    };
    Ok(Run {
        command,
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        threads: args.threads.or(cfg.threads).unwrap_or(0),
        out: args.out.clone().or(cfg.out.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(".")),
        params: cfg.params,
    })
}

fn execute(run: &Run) -> Result<Vec<Artifact>, CliError> {
    let (c, seed) = (run.command, run.seed);
    match c {
        Command::Sample => {
            let p: SampleParams = parse_params(&run.params)?;
            commands::sample(&p, seed, &Header::new(c, seed, &p))
        }
        Command::Decompose => {
            let p: DecomposeParams = parse_params(&run.params)?;
            commands::decompose_cmd(&p, &Header::new(c, seed, &p))
        }
        Command::Explore => {
            let p: ExploreParams = parse_params(&run.params)?;
            commands::explore(&p, &Header::new(c, seed, &p))
        }
        Command::Cross => {
            let p: CrossParams = parse_params(&run.params)?;
            commands::cross(&p, seed, &Header::new(c, seed, &p))
        }
        Command::CoupleTest => {
            let p: CoupleTestParams = parse_params(&run.params)?;
            commands::couple_test(&p, seed, &Header::new(c, seed, &p))
        }
        Command::Stability => {
            let p: StabilityParams = parse_params(&run.params)?;
            commands::stability(&p, seed, &Header::new(c, seed, &p))
        }
        Command::Conditions => {
            let p: ConditionsParams = parse_params(&run.params)?;
            commands::conditions(&p, seed, &Header::new(c, seed, &p))
        }
    }
}

/// Writes every artifact through a temporary file and a rename. On any
/// failure the files written so far are removed again.
fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut done: Vec<PathBuf> = Vec::new();
    let result = (|| {
        for a in artifacts {
            let tmp = dir.join(format!(".{}.partial", a.name));
            done.push(tmp.clone());
            fs::write(&tmp, &a.bytes).map_err(|e| io(&tmp, e))?;
        }
        for a in artifacts {
            let tmp = dir.join(format!(".{}.partial", a.name));
            let dst = dir.join(&a.name);
            fs::rename(&tmp, &dst).map_err(|e| io(&dst, e))?;
            done.push(dst);
        }
        Ok(())
    })();
    if result.is_err() {
        for p in &done {
            let _ = fs::remove_file(p);
        }
    }
    result
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = resolve(&args).and_then(|run| {
        let artifacts = crossloop_experiments::with_threads(run.threads, || execute(&run))
            .map_err(CliError::from_core)??;
        write_all(&run.out, &artifacts)?;
        Ok(artifacts.iter().map(|a| run.out.join(&a.name)).collect::<Vec<_>>())
    });
    match outcome {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("crossloop: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
