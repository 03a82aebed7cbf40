//! `beamquant` - beamforming feedback quantization experiments.
//!
//! Exit status: 0 when the command succeeds and every printed check
//! passes, 1 on a failed check or data error, 2 on usage errors.

mod commands;
mod config;
mod matio;
mod report;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "beamquant",
    version,
    about = "Givens-rotation beamforming feedback: codecs, codebook training, link simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preconfigured reproduction and check it against its targets.
    Reproduce {
        /// Which table/figure to reproduce.
        #[arg(value_enum)]
        id: reproduce::TargetId,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Trials / channels / samples, depending on the target.
        #[arg(long)]
        trials: Option<usize>,
        /// Output directory for CSV files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Quantize and serialize a beamforming matrix from a text file.
    Encode {
        /// Matrix file: one row per line, entries like `0.6+0.8i`.
        file: PathBuf,
        /// Scheme id: a, b, c, d, e, traditional, proposed, fixed:<bp>:<bf>.
        #[arg(long)]
        scheme: String,
    },
    /// Decode a hex feedback payload back to indices, angles and matrix.
    Decode {
        /// Payload hex dump (as printed by `encode`).
        hex: String,
        #[arg(long)]
        scheme: String,
        /// Matrix shape, e.g. 3x2.
        #[arg(long)]
        dims: String,
        /// Exact payload bit length; when omitted, up to 7 trailing zero
        /// pad bits are accepted.
        #[arg(long)]
        bits: Option<usize>,
    },
    /// Train per-parameter rotation-angle codebooks and export CSV.
    Train {
        /// Matrix shape, e.g. 3x1.
        #[arg(long)]
        dims: String,
        /// Codebook size.
        #[arg(long, default_value_t = 2)]
        levels: usize,
        /// Training sample count (at least 10000).
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a campaign described by a TOML config file.
    Campaign {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Command failure split by exit status.
pub enum CliError {
    /// Bad invocation or config: exit 2.
    Usage(String),
    /// Data or runtime failure: exit 1.
    Fail(String),
}

impl CliError {
    fn usage(e: impl ToString) -> Self {
        Self::Usage(e.to_string())
    }

    fn fail(e: impl ToString) -> Self {
        Self::Fail(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Reproduce {
            id,
            seed,
            trials,
            out,
        } => reproduce::run(id, seed, trials, &out),
        Command::Encode { file, scheme } => commands::cmd_encode(&file, &scheme),
        Command::Decode {
            hex,
            scheme,
            dims,
            bits,
        } => commands::cmd_decode(&hex, &scheme, &dims, bits),
        Command::Train {
            dims,
            levels,
            samples,
            seed,
            out,
        } => commands::cmd_train(&dims, levels, samples, seed, &out),
        Command::Campaign { config, out } => commands::cmd_campaign(&config, out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::from(1)
        }
        Err(CliError::Fail(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
