#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ConfigError;

#[derive(Parser)]
#[command(name = "fhtc", version, about = "Outage and transmission capacity of finite frequency-hopping ad hoc networks")]
struct Cli {
    /// TOML scenario file; defaults apply to anything it leaves out.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set channel.m0=1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Worker threads (results do not depend on this).
    #[arg(long, env = "FHTC_THREADS", global = true)]
    threads: Option<usize>,

    /// Shorthand for `--set solver.seed=N`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file; stdout when absent.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conditional outage vs SNR for one topology, with Monte Carlo check.
    OutageCurve,
    /// Spatially averaged outage vs number of interferers.
    AvgOutage,
    /// Normalized transmission capacity over an (L', R, h) grid.
    TcSurface,
    /// Maximize transmission capacity over (L', R, h).
    Optimize {
        /// Also write the summary rows here.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Estimate the CPFSK capacity grid and write it as a table file.
    CapacityTable,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] fhtc::Error),
    #[error("{0}")]
    Other(String),
}

impl From<Box<dyn std::error::Error>> for CliError {
    fn from(e: Box<dyn std::error::Error>) -> Self {
        match e.downcast::<fhtc::Error>() {
            Ok(core) => CliError::Core(*core),
            Err(e) => match e.downcast::<ConfigError>() {
                Ok(c) => CliError::Config(*c),
                Err(e) => CliError::Other(e.to_string()),
            },
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

fn write_out(path: Option<&PathBuf>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Other(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("solver.seed={seed}"));
    }
    let cfg = config::load_file(cli.config.as_deref(), &overrides)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError::Invalid("--threads must be positive".into()).into());
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
        #[cfg(not(feature = "parallel"))]
        log::warn!("built without the parallel feature; --threads {n} ignored");
    }
    let out = match cli.command {
        Command::OutageCurve => commands::outage_curve(&cfg)?,
        Command::AvgOutage => commands::avg_outage(&cfg)?,
        Command::TcSurface => commands::tc_surface(&cfg)?,
        Command::CapacityTable => commands::capacity_table(&cfg)?,
        Command::Optimize { table } => {
            let (out, rows) = commands::optimize_cmd(&cfg)?;
            if let Some(p) = &table {
                write_out(Some(p), &rows)?;
            }
            out
        }
    };
    write_out(cli.output.as_ref(), &out.body)?;
    if cli.output.is_some() {
        if let Some(summary) = out.summary {
            print!("{summary}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
