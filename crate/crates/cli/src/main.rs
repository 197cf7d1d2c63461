//! `wada`: dimension tables, cross-checks and pictures for the lakes of Wada.
//!
//! Every command writes one JSON document to stdout (except `design`, which
//! prints the bare sequence spec unless `--json` is given); progress and
//! timings go to stderr. Exit codes: 0 success, 1 failed verification or
//! runtime error, 2 usage or input error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use wada_core::counting::{box_counts, count_table, dimension_from_counts};
use wada_core::raster::{write_ppm, DEFAULT_RASTER_SIDE_CAP};
use wada_core::rational::format_rational;
use wada_core::sequence::scale_values;
use wada_core::tiling::DEFAULT_CELL_CAP;
use wada_core::{
    analytic_dimension, design_sequence, rasterize_at_level, verify, ParamSequence, RasterConfig, TilingConfig,
    VerifyConfig, WadaError, SCHEMA,
};

#[derive(Parser, Debug)]
#[command(name = "wada", version, about = "Box dimension of the lakes of Wada boundary")]
struct Cli {
    /// Emit JSON for commands that default to plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic dimension and a regression over exact box counts.
    Dim {
        #[command(flatten)]
        seq: SeqArg,
        /// Depth of the analytic window and of the regression.
        #[arg(long, default_value_t = 20)]
        days: usize,
    },
    /// Exact table of t_n, N(t_n), T(n) and A(n).
    Counts {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, default_value_t = 10)]
        days: usize,
    },
    /// Compare recurrence, tiling and raster day by day.
    Verify {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, default_value_t = 6)]
        days: usize,
        #[command(flatten)]
        caps: Caps,
    },
    /// Sequence whose boundary has the target dimension.
    Design {
        /// Target dimension in [1, 2].
        #[arg(long)]
        target: f64,
    },
    /// Write the square after the given day as a binary PPM image.
    Render {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long)]
        days: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        caps: Caps,
    },
}

#[derive(Args, Debug)]
struct SeqArg {
    /// `const:c`, `list:a,b,...[;cycle]` or `affine:b,s`.
    #[arg(long = "seq")]
    spec: String,
}

impl SeqArg {
    fn parse(&self) -> Result<ParamSequence, WadaError> {
        ParamSequence::parse(&self.spec)
    }
}

#[derive(Args, Debug)]
struct Caps {
    /// Largest raster side in pixels.
    #[arg(long = "raster-cap", default_value_t = DEFAULT_RASTER_SIDE_CAP)]
    raster_cap: u64,
    /// Largest tiling built square by square.
    #[arg(long = "cell-cap", default_value_t = DEFAULT_CELL_CAP)]
    cell_cap: u64,
}

impl Caps {
    fn raster(&self) -> RasterConfig {
        RasterConfig {
            side_cap: self.raster_cap,
            tiling: TilingConfig {
                cell_cap: self.cell_cap,
                ..TilingConfig::default()
            },
        }
    }
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Pass,
    Fail,
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    let written = serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(out));
    match written {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn finite_depth_dimension(seq: &ParamSequence, n: usize) -> f64 {
    let log_sum: f64 = (1..=n).map(|i| seq.ln_term(i)).sum();
    1.0 + n as f64 * std::f64::consts::LN_2 / log_sum
}

fn cmd_dim(seq: &ParamSequence, days: usize) -> anyhow::Result<Outcome> {
    let analytic = analytic_dimension(seq, days)?;
    let regression = match box_counts(seq, days) {
        Ok(counts) => {
            let t = scale_values(seq, days);
            let pairs: Vec<_> = t.into_iter().zip(counts).skip(1).collect();
            Some(dimension_from_counts(&pairs)?)
        }
        Err(WadaError::NonInteger { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    print_json(&json!({
        "schema": SCHEMA,
        "sequence": seq.spec(),
        "days": days,
        "analytic": analytic,
        "finite_depth": finite_depth_dimension(seq, days),
        "regression": regression,
    }))?;
    Ok(Outcome::Pass)
}

fn cmd_counts(seq: &ParamSequence, days: usize) -> anyhow::Result<Outcome> {
    print_json(&json!({
        "schema": SCHEMA,
        "sequence": seq.spec(),
        "rows": count_table(seq, days),
    }))?;
    Ok(Outcome::Pass)
}

fn cmd_verify(seq: &ParamSequence, days: usize, caps: &Caps) -> anyhow::Result<Outcome> {
    let report = verify(seq, days, &VerifyConfig { raster: caps.raster() })?;
    for (stage, secs) in &report.timings {
        eprintln!("{stage}: {secs:.3} s");
    }
    eprintln!("verify {} days {}: {}", report.sequence, days, if report.pass { "pass" } else { "FAIL" });
    print_json(&report)?;
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_design(target: f64, as_json: bool) -> anyhow::Result<Outcome> {
    let design = design_sequence(target)?;
    if as_json {
        print_json(&json!({
            "schema": SCHEMA,
            "target": target,
            "sequence": design.sequence.spec(),
            "dimension": design.sequence.limit_dimension(),
            "exact": design.exact,
            "note": design.note,
        }))?;
    } else {
        if let Some(note) = &design.note {
            eprintln!("note: {note}");
        }
        writeln!(std::io::stdout(), "{}", design.sequence.spec())?;
    }
    Ok(Outcome::Pass)
}

fn cmd_render(seq: &ParamSequence, days: usize, out: &PathBuf, caps: &Caps) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let raster = rasterize_at_level(seq, days, days, &caps.raster())?;
    write_ppm(&raster, out)?;
    eprintln!("wrote {} ({} px square) in {:.3} s", out.display(), raster.side(), start.elapsed().as_secs_f64());
    print_json(&json!({
        "schema": SCHEMA,
        "sequence": seq.spec(),
        "days": days,
        "path": out,
        "side": raster.side(),
        "island_fraction": format_rational(&raster.island_fraction()),
    }))?;
    Ok(Outcome::Pass)
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(value) = std::env::var("WADA_THREADS") {
        let threads: usize = value
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| WadaError::InvalidArgument(format!("WADA_THREADS={value} is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    configure_threads()?;
    match &cli.command {
        Command::Dim { seq, days } => cmd_dim(&seq.parse()?, *days),
        Command::Counts { seq, days } => cmd_counts(&seq.parse()?, *days),
        Command::Verify { seq, days, caps } => cmd_verify(&seq.parse()?, *days, caps),
        Command::Design { target } => cmd_design(*target, cli.json),
        Command::Render { seq, days, out, caps } => cmd_render(&seq.parse()?, *days, out, caps),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            let usage = err.downcast_ref::<WadaError>().is_some_and(WadaError::is_usage);
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
