// SPDX-License-Identifier: MIT OR Apache-2.0
//! `countdiag` command-line tool.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use countdiag::asymptotics::IndexKind;
use countdiag::diagnostics::{test_index, NullSpec, Sidedness, TestReport};
use countdiag::model::{apply_mask, simulate_markov_mask_with, simulate_model_with};
use countdiag::{Bar1, CountSeries, MissingSpec, ModelSpec, PoiInar1, Seed};
use countdiag_harness::{
    curves::MIN_CURVE_TAU, emit_curves, load_series_csv, render_grid_table, run_grid, write_curves_csv,
    write_grid_csv, write_series, CurveSpec, GridConfig, NaPolicy,
};

#[derive(Parser)]
#[command(name = "countdiag", version, about = "Dispersion and skewness diagnostics for gappy count series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a count series with Markov missingness and write it as CSV.
    Simulate(SimulateArgs),
    /// Test a series from CSV against a Poisson or binomial AR(1) null.
    Diagnose(DiagnoseArgs),
    /// Run a Monte Carlo grid from a JSON config.
    Mc(McArgs),
    /// Write T-scaled asymptotic variance and bias over a range of observation rates.
    Curves(CurvesArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Poisson,
    Binomial,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sided {
    Two,
    Upper,
    Lower,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "poisson")]
    model: Family,
    /// Marginal mean.
    #[arg(long, default_value_t = 3.0)]
    mu: f64,
    /// Lag-one autocorrelation.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Upper bound of the binomial model.
    #[arg(long)]
    n: Option<u64>,
    /// Probability of observing a time point.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Lag-one autocorrelation of the observation indicator.
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    /// Series length.
    #[arg(long = "length", short = 't', default_value_t = 100)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct DiagnoseArgs {
    /// CSV with one count per line; `NA` or an empty field is missing.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    null: Family,
    /// Upper bound, required with `--null binomial`.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Drop missing points and treat the rest as a complete series.
    #[arg(long)]
    ignore_missing: bool,
    #[arg(long, value_enum, default_value = "two")]
    sided: Sided,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Also write both reports as JSON to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(clap::Args)]
struct McArgs {
    /// Grid config in JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Do not print the summary table.
    #[arg(long)]
    quiet: bool,
}

#[derive(clap::Args)]
struct CurvesArgs {
    /// poi_dispersion, bin_dispersion, skew_poi or skew_bin.
    #[arg(long)]
    index: IndexKind,
    #[arg(long, default_value_t = 3.0)]
    mu: f64,
    /// Upper bound for the binomial indices.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Mask autocorrelations, one curve each.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.3, 0.6])]
    r: Vec<f64>,
    #[arg(long, default_value_t = MIN_CURVE_TAU)]
    tau_min: f64,
    #[arg(long, default_value_t = 1.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 76)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let model = match args.model {
        Family::Poisson => ModelSpec::PoiInar1(PoiInar1::new(args.mu, args.rho)?),
        Family::Binomial => {
            let Some(n) = args.n else { bail!("--model binomial needs --n") };
            ModelSpec::Bar1(Bar1::new(n, args.mu / n as f64, args.rho)?)
        }
    };
    let missing = MissingSpec::new(args.tau, args.r)?;
    let mut rng = Seed::new(args.seed, 0).rng();
    let values = simulate_model_with(&model, args.length, &mut rng)?;
    let mask = simulate_markov_mask_with(&missing, args.length, &mut rng)?;
    let series = apply_mask(&CountSeries::fully_observed(values)?, &mask)?;
    match args.out {
        Some(path) => write_series(&series, create(&path)?)?,
        None => write_series(&series, io::stdout().lock())?,
    }
    Ok(())
}

fn diagnose(args: DiagnoseArgs) -> Result<()> {
    let series = load_series_csv(&args.input, NaPolicy::Mask)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut null = match args.null {
        Family::Poisson => NullSpec::poisson(args.alpha),
        Family::Binomial => {
            let Some(n) = args.n else { bail!("--null binomial needs --n") };
            NullSpec::binomial(n, args.alpha)
        }
    };
    if args.null == Family::Poisson && args.n.is_some() {
        bail!("--n only applies to the binomial null");
    }
    null.ignore_missing = args.ignore_missing;
    null.sidedness = match args.sided {
        Sided::Two => Sidedness::TwoSided,
        Sided::Upper => Sidedness::Upper,
        Sided::Lower => Sidedness::Lower,
    };

    let reports: Vec<TestReport> = [null.dispersion_kind(), null.skewness_kind()]
        .into_iter()
        .map(|kind| test_index(&series, &null, kind).with_context(|| format!("testing {kind}")))
        .collect::<Result<_>>()?;

    if let Some(path) = &args.report {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &reports)?;
        writeln!(w)?;
        w.flush()?;
    }
    let mut out = io::stdout().lock();
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &reports)?;
            writeln!(out)?;
        }
        Format::Text => {
            let observed = series.n_observed();
            writeln!(out, "series         {} points, {} observed", series.len(), observed)?;
            for r in &reports {
                writeln!(out)?;
                writeln!(out, "{r}")?;
            }
        }
    }
    Ok(())
}

fn mc(args: McArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let config = GridConfig::from_json(&text).context("parsing grid config")?;
    let rows = run_grid(&config, args.workers)?;
    let mut w = create(&args.out)?;
    write_grid_csv(&rows, &mut w)?;
    w.flush()?;
    if !args.quiet {
        print!("{}", render_grid_table(&rows));
    }
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} scenarios failed; see the error column", rows.len());
    }
    Ok(())
}

fn curves(args: CurvesArgs) -> Result<()> {
    let spec = CurveSpec {
        kind: args.index,
        mu: args.mu,
        n: args.n,
        rho: args.rho,
        r_values: args.r,
        tau_min: args.tau_min,
        tau_max: args.tau_max,
        points: args.points,
    };
    let rows = emit_curves(&spec)?;
    let mut w = create(&args.out)?;
    write_curves_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Mc(a) => mc(a),
        Command::Curves(a) => curves(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
