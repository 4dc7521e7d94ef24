//! `mql`: analyze Markov operators through their topological quivers.

mod load;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mql_core::ifs::IfsSystem;
use mql_core::selftest::{run_all, DEFAULT_SEED};
use mql_core::structure::decide_simplicity;
use mql_core::{build_quiver, Error};

use load::{load, Loaded};
use report::{ArtifactKind, IfsOptions, Report};

#[derive(Parser)]
#[command(name = "mql", version, about = "Quiver analysis of Markov operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quiver summary, vertex classification and condition (L)
    Analyze(Opts),
    /// Simplicity verdict with witnesses
    Simplicity(Opts),
    /// Dual quiver, its Markov realization and K-theory
    Dual(Opts),
    /// Attractor, branch points, isometry and fixed-point certificate of an affine IFS
    Ifs(Opts),
    /// Run the acceptance suite
    Selftest(Opts),
}

#[derive(Args)]
struct Opts {
    /// Model file (JSON)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Override the number of grid points of an interval model
    #[arg(long)]
    grid: Option<usize>,
    /// Grid refinement levels for continuum condition (L), 1-5 (at least 3 are used)
    #[arg(long, default_value_t = 3)]
    refinements: usize,
    /// Longest word for the IFS fixed-point certificate, 1-12
    #[arg(long, default_value_t = 8)]
    maxlen: usize,
    /// Hutchinson iterations for the IFS attractor sample, 1-24
    #[arg(long, default_value_t = 12)]
    depth: usize,
    /// Seed for randomized checks
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory for report.json, report.txt and artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write DOT files for the quivers
    #[arg(long)]
    dot: bool,
    /// Write CSV files (IFS attractor, certificate, convergence)
    #[arg(long)]
    csv: bool,
    /// Print the JSON report instead of text
    #[arg(long)]
    json: bool,
    /// Read kernel matrices as row-stochastic
    #[arg(long)]
    transpose: bool,
}

enum Failure {
    Invalid(String),
    Analysis(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Validation(_) | Error::Dimension { .. } | Error::Capacity { .. } => {
                Failure::Invalid(e.to_string())
            }
            Error::Domain(_) | Error::Precondition(_) => Failure::Analysis(e.to_string()),
        }
    }
}

fn check_range(name: &str, value: usize, lo: usize, hi: usize) -> Result<(), Failure> {
    if (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("--{name} must be in {lo}..={hi}, got {value}")))
    }
}

fn model_path(opts: &Opts) -> Result<&Path, Failure> {
    opts.model
        .as_deref()
        .ok_or_else(|| Failure::Invalid("--model is required for this command".into()))
}

fn run(cli: &Cli) -> Result<(Report, bool, &Opts), Failure> {
    let (Command::Analyze(opts)
    | Command::Simplicity(opts)
    | Command::Dual(opts)
    | Command::Ifs(opts)
    | Command::Selftest(opts)) = &cli.command;
    check_range("refinements", opts.refinements, 1, 5)?;
    check_range("maxlen", opts.maxlen, 1, 12)?;
    check_range("depth", opts.depth, 1, 24)?;

    if let Command::Selftest(_) = cli.command {
        let results = run_all(opts.seed);
        let ok = results.iter().all(|r| r.passed);
        return Ok((report::selftest(&results, opts.seed), ok, opts));
    }

    let loaded = load(model_path(opts)?, opts.transpose, opts.grid, opts.refinements)?;
    let report = match (&cli.command, &loaded) {
        (Command::Analyze(_), Loaded::Exact(m)) => report::analyze(Some(m), &build_quiver(m), opts.refinements),
        (Command::Analyze(_), Loaded::Grid(m)) => report::analyze(Some(m), &build_quiver(m), opts.refinements),
        (Command::Analyze(_), Loaded::Quiver(q)) => report::analyze::<mql_core::Rational>(None, q, opts.refinements),
        (Command::Simplicity(_), Loaded::Exact(m)) => report::simplicity(m, &decide_simplicity(m, opts.refinements)?),
        (Command::Simplicity(_), Loaded::Grid(m)) => report::simplicity(m, &decide_simplicity(m, opts.refinements)?),
        (Command::Simplicity(_), Loaded::Quiver(q)) => {
            let m = q.to_markov_model()?;
            report::simplicity(&m, &decide_simplicity(&m, opts.refinements)?)
        }
        (Command::Dual(_), Loaded::Exact(m)) => report::dual(&build_quiver(m)),
        (Command::Dual(_), Loaded::Grid(m)) => report::dual(&build_quiver(m)),
        (Command::Dual(_), Loaded::Quiver(q)) => report::dual(q),
        (Command::Ifs(_), Loaded::Grid(m)) => {
            let system = IfsSystem::from_model(m)?;
            let grid = opts.grid.unwrap_or(m.len());
            report::ifs(
                &system,
                &IfsOptions {
                    depth: opts.depth,
                    maxlen: opts.maxlen,
                    grid,
                    seed: opts.seed,
                },
            )?
        }
        (Command::Ifs(_), _) => {
            return Err(Failure::Analysis(
                "ifs needs a map_system model with affine maps on an interval_grid".into(),
            ))
        }
        (Command::Selftest(_), _) => unreachable!("handled above"),
    };
    Ok((report, true, opts))
}

fn emit(report: &Report, opts: &Opts) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(&report.json).expect("reports serialize") + "\n";
    if opts.json {
        print!("{json}");
    } else {
        print!("{}", report.text);
    }
    let wants = |k: ArtifactKind| match k {
        ArtifactKind::Dot => opts.dot,
        ArtifactKind::Csv => opts.csv,
    };
    let artifacts: Vec<_> = report.artifacts.iter().filter(|a| wants(a.kind)).collect();
    if opts.out.is_none() && artifacts.is_empty() {
        return Ok(());
    }
    let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    if opts.out.is_some() {
        std::fs::write(dir.join("report.json"), &json)?;
        std::fs::write(dir.join("report.txt"), &report.text)?;
    }
    for a in artifacts {
        std::fs::write(dir.join(&a.name), &a.contents)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, ok, opts)) => {
            if let Err(e) = emit(&report, opts) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
