mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use cantor_core::census::Convention;
use cantor_core::Error;
use clap::{Args, Parser, Subcommand};

use config::Config;
use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "cantor",
    version,
    about = "Rational points and intrinsic approximation on missing-digit Cantor sets"
)]
pub struct Cli {
    /// TOML config file.
    #[arg(long, global = true, env = "CANTOR_CONFIG")]
    pub config: Option<PathBuf>,

    /// Scheme as "b=<base>;S=<d1>,<d2>,...".
    #[arg(long = "set", global = true, value_name = "SCHEME")]
    pub scheme: Option<String>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads; 1 runs every scan serially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Omit wall-clock fields from JSON output.
    #[arg(long, global = true)]
    pub deterministic: bool,

    #[arg(long, global = true)]
    pub max_windows: Option<u64>,

    #[arg(long, global = true)]
    pub max_denominator: Option<u64>,

    #[arg(long, global = true)]
    pub max_forms: Option<u64>,

    #[arg(long, global = true)]
    pub max_stream_digits: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

/// Where the approximated point comes from. Defaults to the configured seed.
#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct StreamArgs {
    /// A member rational `p/q`.
    #[arg(long)]
    pub x_rational: Option<String>,
    /// Explicit base-b digits, all in S.
    #[arg(long)]
    pub x_digits: Option<String>,
    /// Uniform random digits from S.
    #[arg(long)]
    pub x_seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the effective configuration as TOML.
    Config,
    /// Describe a scheme: base, digits, minimal base, power, dimension.
    Scheme,
    /// Decide membership of a rational in [0, 1].
    Member { fraction: String },
    /// Base-b expansion of a rational.
    Expand { fraction: String },
    /// Enumerate closed-form members.
    Forms {
        /// Bound on k + l.
        #[arg(long, conflicts_with_all = ["max_preperiod", "max_period"])]
        max_len: Option<usize>,
        #[arg(long, requires = "max_period")]
        max_preperiod: Option<usize>,
        #[arg(long, requires = "max_preperiod")]
        max_period: Option<usize>,
    },
    /// Pigeonhole approximation certificate at level n.
    Approx {
        #[command(flatten)]
        x: StreamArgs,
        #[arg(long)]
        n: u32,
    },
    /// Re-check a certificate written by `approx --format json`.
    Verify {
        /// Certificate file, or - for stdin.
        #[arg(long, default_value = "-")]
        cert: String,
        #[command(flatten)]
        x: StreamArgs,
    },
    /// Certificates for n = 1..=n-max with the logarithmic bound checked.
    Ladder {
        #[command(flatten)]
        x: StreamArgs,
        #[arg(long)]
        n_max: u32,
    },
    /// Count reduced members by denominator.
    Census {
        /// Single range start (with --to).
        #[arg(long, requires = "to", conflicts_with_all = ["n_lo", "n_hi"])]
        from: Option<u64>,
        #[arg(long, requires = "from")]
        to: Option<u64>,
        /// First band b^n..b^(n+1).
        #[arg(long, requires = "n_hi")]
        n_lo: Option<u32>,
        #[arg(long, requires = "n_lo")]
        n_hi: Option<u32>,
        #[arg(long, default_value_t = 4096)]
        chunk: u64,
        /// JSON-lines checkpoint for banded runs.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "inclusive")]
        convention: Convention,
    },
    /// Halved ratio of consecutive band counts.
    Phi {
        #[arg(long, conflicts_with = "table1")]
        n: Option<u32>,
        /// n = 4..8 next to the published values.
        #[arg(long)]
        table1: bool,
        /// With --table1, continue to n = 11.
        #[arg(long, requires = "table1")]
        extended: bool,
        #[arg(long, default_value = "inclusive")]
        convention: Convention,
    },
    /// Least-squares slope of log2 N over consecutive bands.
    Fit {
        #[arg(long, default_value_t = 4)]
        n_lo: u32,
        #[arg(long, default_value_t = 8)]
        n_hi: u32,
        #[arg(long, default_value = "inclusive")]
        convention: Convention,
    },
    /// Best intrinsic approximations up to q-max with badness scores.
    Score {
        #[command(flatten)]
        x: StreamArgs,
        #[arg(long)]
        q_max: u64,
        /// Flag records with |x - p/q| < q^-(1+eps).
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Continued-fraction convergents.
    Convergents {
        #[command(flatten)]
        x: StreamArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Convergents split by membership, with eps' for those outside.
    Extrinsic {
        #[command(flatten)]
        x: StreamArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceGuard { .. } => 3,
        Error::PrecisionExhausted { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => Config::default(),
    };
    match commands::run(&cli, config) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.negative { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
