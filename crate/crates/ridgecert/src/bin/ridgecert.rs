//! Thin front end over [`ridgecert::commands`]: parses flags, merges
//! them over the JSON config (flags win), and routes the outputs.
//!
//! Exit codes: 0 ok, 2 usage or config problem, 3 a certified property
//! failed on concrete data, 4 numerical breakdown of an estimator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ridgecert::commands::{self, CommandOutput};
use ridgecert::config::{self, BayesDfConfig, CertifyConfig, CurvesConfig, OracleConfig};
use ridgecert::error::RidgeError;

#[derive(Parser)]
#[command(
    name = "ridgecert",
    version,
    about = "Detect the few directions a likelihood depends on and certify the cost of ignoring the rest"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the majorized loss families on an (alpha, t) grid
    Curves(Common),
    /// Closed-form linear-Gaussian benchmark: exact losses vs bounds
    Oracle(Common),
    /// Certify eigenvalue tails of a diagnostic matrix estimated from a
    /// gradient batch
    Certify(CertifyArgs),
    /// Data-free certification from the prior-averaged Fisher information
    BayesDf(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// CSV output path (overrides `out` in the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed` in the config)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: Common,
    /// Gradient batch file, CSV or binary (overrides `batch` in the config)
    #[arg(long)]
    batch: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ridgecert: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), RidgeError> {
    match cli.command {
        Command::Curves(c) => {
            let mut cfg: CurvesConfig = config::load_config(&c.config)?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            let out = c.out.or_else(|| cfg.out.clone());
            emit_csv(commands::cmd_curves(&cfg)?, out.as_deref())
        }
        Command::Oracle(c) => {
            let mut cfg: OracleConfig = config::load_config(&c.config)?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            let out = c.out.or_else(|| cfg.out.clone());
            emit_csv(commands::cmd_oracle(&cfg)?, out.as_deref())
        }
        Command::Certify(c) => {
            let mut cfg: CertifyConfig = config::load_config(&c.common.config)?;
            if let Some(s) = c.common.seed {
                cfg.seed = s;
            }
            let batch = c.batch.or_else(|| cfg.batch.clone()).ok_or_else(|| {
                RidgeError::Config(
                    "no gradient batch: pass --batch or set `batch` in the config".into(),
                )
            })?;
            let out = c.common.out.or_else(|| cfg.out.clone());
            emit_report(commands::cmd_certify(&cfg, &batch)?, out.as_deref())
        }
        Command::BayesDf(c) => {
            let mut cfg: BayesDfConfig = config::load_config(&c.config)?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            let out = c.out.or_else(|| cfg.out.clone());
            emit_report(commands::cmd_bayes_df(&cfg)?, out.as_deref())
        }
    }
}

/// The CSV is the product: to the file when a path is given (with the
/// one-line report on stdout), straight to stdout otherwise.
fn emit_csv(o: CommandOutput, out: Option<&Path>) -> Result<(), RidgeError> {
    match out {
        Some(path) => {
            std::fs::write(path, &o.csv)?;
            print!("{}", o.report);
        }
        None => print!("{}", o.csv),
    }
    Ok(())
}

/// The report is the product; the CSV mirror is written only on request.
fn emit_report(o: CommandOutput, out: Option<&Path>) -> Result<(), RidgeError> {
    print!("{}", o.report);
    if let Some(path) = out {
        std::fs::write(path, &o.csv)?;
    }
    Ok(())
}
