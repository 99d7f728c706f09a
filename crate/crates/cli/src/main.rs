use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use crosscorr::market_data::MissingPolicy;
use crosscorr::reports::{
    cmd_ladder, cmd_rolling, cmd_spectrum, cmd_surrogate, InputArgs, LadderArgs, RollingArgs, SpectrumArgs,
    SurrogateArgs,
};
use crosscorr::rmt::SigmaMode;
use crosscorr::surrogates::SurrogateKind;
use crosscorr::{Error, ErrorClass};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "crosscorr",
    version,
    about = "Cross-correlation spectra of multi-asset price panels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue spectrum, histograms and bulk comparison for one base.
    Spectrum(SpectrumCmd),
    /// Largest eigenvalue under every base, ranked.
    Ladder(LadderCmd),
    /// Largest eigenvalue over a sliding window.
    Rolling(RollingCmd),
    /// Write a seeded surrogate price table.
    Surrogate(SurrogateCmd),
}

#[derive(Args)]
struct InputOpts {
    /// Price table CSV (date column plus one column per asset).
    #[arg(long)]
    input: PathBuf,
    /// Capitalization table CSV with the same layout.
    #[arg(long)]
    caps: Option<PathBuf>,
    /// Currency the input prices are quoted in.
    #[arg(long, default_value = "USD")]
    quote: String,
    /// What to do with assets that have missing prices.
    #[arg(long, value_enum, default_value_t = Missing::Reject)]
    missing: Missing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Missing {
    Reject,
    Drop,
}

impl InputOpts {
    fn into_args(self) -> InputArgs {
        InputArgs {
            input: self.input,
            caps: self.caps,
            quote: self.quote,
            missing: match self.missing {
                Missing::Reject => MissingPolicy::RejectIncomplete,
                Missing::Drop => MissingPolicy::DropIncompleteAssets,
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Sigma {
    FixedUnit,
    TraceCompensated,
}

#[derive(Args)]
struct SpectrumCmd {
    #[command(flatten)]
    input: InputOpts,
    /// `quote`, `fict` or an asset ticker.
    #[arg(long, default_value = "quote")]
    base: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    /// Also analyse the residuals after removing the market factor.
    #[arg(long)]
    remove_market: bool,
    #[arg(long, value_enum, default_value_t = Sigma::FixedUnit)]
    sigma_mode: Sigma,
    #[arg(long, default_value_t = 40)]
    bins: usize,
    /// Include all eigenvectors in eigenvalues.json.
    #[arg(long)]
    eigenvectors: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct LadderCmd {
    #[command(flatten)]
    input: InputOpts,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RollingCmd {
    #[command(flatten)]
    input: InputOpts,
    /// Comma-separated bases.
    #[arg(long, value_delimiter = ',', default_value = "quote")]
    base: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 182)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    /// Comma-separated assets whose capitalization share to track.
    #[arg(long, value_delimiter = ',')]
    shares: Vec<String>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SurrogateCmd {
    /// iid, fict or one-factor.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    /// Number of returns; the table gets one more row.
    #[arg(long)]
    t: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Factor loading for one-factor surrogates.
    #[arg(long)]
    c: Option<f64>,
    /// First date (YYYY-MM-DD).
    #[arg(long)]
    start: Option<NaiveDate>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn run(cli: Cli, argv: &[String]) -> crosscorr::Result<PathBuf> {
    let set = match cli.command {
        Command::Spectrum(c) => cmd_spectrum(
            &SpectrumArgs {
                input: c.input.into_args(),
                base: c.base,
                seed: c.seed,
                tau: c.tau,
                remove_market: c.remove_market,
                sigma_mode: match c.sigma_mode {
                    Sigma::FixedUnit => SigmaMode::FixedUnit,
                    Sigma::TraceCompensated => SigmaMode::TraceCompensated,
                },
                bins: c.bins,
                eigenvectors: c.eigenvectors,
                out_dir: c.out_dir,
            },
            argv,
        )?,
        Command::Ladder(c) => cmd_ladder(
            &LadderArgs {
                input: c.input.into_args(),
                seed: c.seed,
                tau: c.tau,
                out_dir: c.out_dir,
            },
            argv,
        )?,
        Command::Rolling(c) => cmd_rolling(
            &RollingArgs {
                input: c.input.into_args(),
                bases: c.base,
                seed: c.seed,
                window: c.window,
                step: c.step,
                tau: c.tau,
                shares: c.shares,
                out_dir: c.out_dir,
            },
            argv,
        )?,
        Command::Surrogate(c) => cmd_surrogate(
            &SurrogateArgs {
                kind: c.kind.parse::<SurrogateKind>()?,
                n: c.n,
                t: c.t,
                seed: c.seed,
                factor_loading: c.c,
                start: c.start,
                out_dir: c.out_dir,
            },
            argv,
        )?,
    };
    Ok(set.out_dir)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli, &argv[1..]) {
        Ok(dir) => {
            println!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::InvalidBins(_) | Error::InvalidRolling(_) | Error::InvalidSurrogate(_) => EXIT_USAGE,
        _ => match e.class() {
            ErrorClass::Input => EXIT_INPUT,
            ErrorClass::Numeric => EXIT_NUMERIC,
        },
    }
}
