//! Command-line front end over the library.
//!
//! A simulation that observed a half-duplex violation exits with status 1.
//! Any other failure exits with status 2.

mod output;
mod simulate;
mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::awgn::{
    awgn_capacity_lower, awgn_conventional_rate, awgn_gaussian_input_rate, awgn_upper_bound,
    optimize_mass_points, AwgnPair, PowerConvention, SearchSpec,
};
use crate::bsc::{bsc_capacity, bsc_conventional_rate, BscPair};

pub use output::format_sig6;
pub use simulate::{SIM_HEADER, SIM_SCHEMA};
pub use sweep::SWEEP_SCHEMA;

/// Environment variable consulted for the seed when neither the command
/// line nor the configuration provides one.
pub const SEED_ENV: &str = "HDRELAY_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "hdrelay",
    version,
    about = "Half-duplex relay capacity and coding simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate capacity and benchmark rates at one operating point.
    Capacity {
        #[command(subcommand)]
        channel: CapacityChannel,
    },
    /// Evaluate rate curves over a grid of channel parameters.
    Sweep(SweepArgs),
    /// Run the block-Markov coding scheme over binary symmetric hops.
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
enum CapacityChannel {
    /// Binary symmetric hops with crossover probabilities E1 and E2.
    Bsc {
        #[arg(long, num_args = 2, value_names = ["E1", "E2"], allow_negative_numbers = true)]
        eps: Vec<f64>,
    },
    /// Gaussian hops with signal-to-noise ratios S1 and S2 in dB.
    Awgn {
        #[arg(long = "snr-db", num_args = 2, value_names = ["S1", "S2"], allow_negative_numbers = true)]
        snr_db: Vec<f64>,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PowerArg {
    /// The active relay symbols carry the power budget.
    Active,
    /// The relay's average over silent and active symbols meets the budget.
    Average,
}

#[derive(Debug, Clone, Args)]
struct SearchArgs {
    /// Which relay power constraint the constellation search enforces.
    #[arg(long, value_enum, default_value_t = PowerArg::Active)]
    power: PowerArg,
    /// Starting shapes tried by the constellation search.
    #[arg(long, default_value_t = 50)]
    restarts: usize,
}

impl SearchArgs {
    fn spec(&self) -> SearchSpec {
        SearchSpec {
            restarts: self.restarts,
            power: match self.power {
                PowerArg::Active => PowerConvention::ActiveSymbol,
                PowerArg::Average => PowerConvention::AverageSymbol,
            },
            ..SearchSpec::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    Bsc,
    Awgn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(value_enum)]
    channel: ChannelArg,
    /// Grid of crossover probabilities (bsc) or relay-hop SNRs in dB (awgn).
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "STEP"], allow_negative_numbers = true)]
    grid: Vec<f64>,
    /// Comma-separated subset of capacity, conv, gauss, upper. Defaults to
    /// every curve defined for the channel.
    #[arg(long, value_delimiter = ',')]
    curves: Option<Vec<String>>,
    /// Source-hop SNR minus relay-hop SNR, in dB (awgn only).
    #[arg(
        long = "snr-offset-db",
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    snr_offset_db: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON experiment description, one object or an array of them.
    config: PathBuf,
    /// Seed overriding the configuration and the environment.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    jobs: Option<usize>,
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Capacity { channel } => {
            let value = match channel {
                CapacityChannel::Bsc { eps } => capacity_bsc(eps[0], eps[1])?,
                CapacityChannel::Awgn { snr_db, search } => {
                    capacity_awgn(snr_db[0], snr_db[1], &search.spec())?
                }
            };
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(0)
        }
        Command::Sweep(args) => sweep::run(&args).map(|_| 0),
        Command::Simulate(args) => simulate::run(&args),
    }
}

fn capacity_bsc(e1: f64, e2: f64) -> anyhow::Result<serde_json::Value> {
    let pair = BscPair::new(e1, e2).context("invalid crossover probabilities")?;
    let sol = bsc_capacity(pair);
    let conv = bsc_conventional_rate(pair);
    Ok(json!({
        "channel": "bsc",
        "p_eps1": e1,
        "p_eps2": e2,
        "p_u_star": sol.p_u_star,
        "capacity": sol.capacity,
        "regime": sol.regime,
        "r1_at_opt": sol.r1_at_opt,
        "r2_at_opt": sol.r2_at_opt,
        "concavity_violations": sol.concavity_violations,
        "conventional_rate": conv,
        "capacity_over_conventional": if conv > 0.0 { Some(sol.capacity / conv) } else { None },
    }))
}

fn capacity_awgn(s1_db: f64, s2_db: f64, search: &SearchSpec) -> anyhow::Result<serde_json::Value> {
    let pair = AwgnPair::from_db(s1_db, s2_db).context("invalid SNR")?;
    let lower = awgn_capacity_lower(&pair, search)?;
    let dist = optimize_mass_points(pair.snr2(), lower.p_u_star, search)?;
    Ok(json!({
        "channel": "awgn",
        "snr1_db": s1_db,
        "snr2_db": s2_db,
        "p_u_star": lower.p_u_star,
        "capacity_lower": lower.capacity,
        "regime": lower.regime,
        "r1_at_opt": lower.r1_at_opt,
        "r2_at_opt": lower.r2_at_opt,
        "conventional_rate": awgn_conventional_rate(&pair),
        "gaussian_input_rate": awgn_gaussian_input_rate(&pair, &search.quad)?,
        "upper_bound": awgn_upper_bound(&pair),
        "relay_constellation": {
            "locations": dist.locations(),
            "side_probs": dist.side_probs(),
        },
    }))
}

/// Builds a worker pool of `jobs` threads (default: all cores).
fn pool(jobs: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    if jobs == Some(0) {
        anyhow::bail!("--jobs must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("could not start worker threads")
}
