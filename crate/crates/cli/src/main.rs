//! `rydgate`: searches, analyses, CZ verification and noise sweeps for
//! single-pulse Rydberg controlled-phase gates.

mod commands;
mod config;
mod design;
mod error;
mod output;
mod sequence;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Ctx;
use config::{RunConfig, DEFAULT_SEED};
use error::CliError;

const DEFAULT_OUT: &str = "rydgate-out";

#[derive(Parser)]
#[command(name = "rydgate", version, about = "Single-pulse Rydberg CZ gate designer")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config, or a `manifest.json` from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; overrides RYDGATE_WORKERS and the config.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory [default: rydgate-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Grid search for U1 gates; needs [search_u1].
    SearchU1,
    /// Multi-start search for U2 gates; needs [search_u2].
    SearchU2,
    /// Angles, residuals, errors and matrix of one gate.
    Analyze {
        /// Fixture name such as `table2.1`; otherwise the config's [design].
        design: Option<String>,
    },
    /// Build the CZ sequence for one gate and report its distance to CZ.
    CzVerify {
        design: Option<String>,
        /// Largest accepted distance to CZ.
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
    /// Noisy-gate error versus temperature; needs [noise].
    NoiseSweep,
    /// Compare against reference table 1, 2 or 3.
    TableRepro { table: u32 },
    /// Print the JSON Schema of the config file.
    ConfigSchema,
}

fn worker_count(flag: Option<usize>, config: &RunConfig) -> Result<usize, CliError> {
    let env = match std::env::var("RYDGATE_WORKERS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::config("RYDGATE_WORKERS", format!("not a worker count: `{v}`")))?,
        ),
        Err(_) => None,
    };
    let n = flag
        .or(env)
        .or(config.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(CliError::config("workers", "must be at least 1"));
    }
    Ok(n)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Command::ConfigSchema = cli.command {
        println!("{}", serde_json::to_string_pretty(&config::schema())?);
        return Ok(true);
    }
    let config = match &cli.config {
        Some(p) => config::load(p)?,
        None => RunConfig::default(),
    };
    let workers = worker_count(cli.workers, &config)?;
    rydgate_core::par::set_workers(workers);
    let ctx = Ctx {
        seed: cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
        workers,
        out: cli.out.clone().or_else(|| config.out.as_ref().map(PathBuf::from)).unwrap_or_else(|| DEFAULT_OUT.into()),
        config,
    };
    match &cli.command {
        Command::SearchU1 => commands::search_u1_cmd(&ctx),
        Command::SearchU2 => commands::search_u2_cmd(&ctx),
        Command::Analyze { design } => commands::analyze_cmd(&ctx, design.as_deref()),
        Command::CzVerify { design, tolerance } => commands::cz_verify_cmd(&ctx, design.as_deref(), *tolerance),
        Command::NoiseSweep => commands::noise_sweep_cmd(&ctx),
        Command::TableRepro { table } => commands::table_repro_cmd(&ctx, *table),
        Command::ConfigSchema => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
