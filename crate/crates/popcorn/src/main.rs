use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use popcorn::commands::{self, CommandName, Format, Overrides, RunConfig};

/// Popcorn-function spectra of randomly weighted linear chains.
#[derive(Parser)]
#[command(name = "popcorn", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Thomae function g(p/q) = 1/q on reduced fractions in (0, 1).
    Popcorn(Flags),
    /// Lorentzian-regularised chain density on a uniform grid.
    SpectralDensity(Flags),
    /// -ln|eta| against pi g^2 / (12 eps) at rational abscissae.
    Bridge(Flags),
    /// Integrated density of states of the Dyson spring chain.
    Dyson(Flags),
    /// Peak series approaching the band edge and the centre, with tail fits.
    Lifshitz(Flags),
    /// Monte-Carlo histogram against the analytic bin masses.
    Oracle(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Flags {
    /// Bond survival probability.
    #[arg(long)]
    f: Option<f64>,
    /// Lorentzian half-width.
    #[arg(long)]
    y: Option<f64>,
    /// Imaginary offset above the real axis.
    #[arg(long)]
    eps: Option<f64>,
    /// Largest block length kept in truncated sums.
    #[arg(long)]
    nmax: Option<usize>,
    /// Largest denominator.
    #[arg(long)]
    qmax: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_max: Option<f64>,
    /// Grid points, or histogram bins for `oracle`.
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Members per peak series.
    #[arg(long)]
    depth: Option<usize>,
    /// Matrix size for `oracle`.
    #[arg(long)]
    size: Option<usize>,
    /// Matrices pooled by `oracle`.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (name, flags) = match cli.command {
        Cmd::Popcorn(a) => (CommandName::Popcorn, a),
        Cmd::SpectralDensity(a) => (CommandName::SpectralDensity, a),
        Cmd::Bridge(a) => (CommandName::Bridge, a),
        Cmd::Dyson(a) => (CommandName::Dyson, a),
        Cmd::Lifshitz(a) => (CommandName::Lifshitz, a),
        Cmd::Oracle(a) => (CommandName::Oracle, a),
    };
    let overrides = Overrides {
        f: flags.f,
        y: flags.y,
        eps: flags.eps,
        nmax: flags.nmax,
        qmax: flags.qmax,
        grid_min: flags.grid_min,
        grid_max: flags.grid_max,
        grid_points: flags.grid_points,
        seed: flags.seed,
        depth: flags.depth,
        size: flags.size,
        samples: flags.samples,
    };
    let format = match flags.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let config = RunConfig::resolve(name, &overrides, format, flags.out)?;
    let data = commands::run(&config)?;
    let bytes = commands::render(&config, &data)?;
    match &config.out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
