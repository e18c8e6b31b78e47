//! `holgeo`: batch front end for complex geodesic computations.

mod commands;
mod report;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use holgeo::clifton_pohl::CPInitial;

use crate::commands::{CpArgs, Output};
use crate::report::{to_json, Report};
use crate::scenario::{Scenario, ValidationError};

#[derive(Debug, Parser)]
#[command(
    name = "holgeo",
    version,
    about = "Geodesics of meromorphic metrics along complex time paths"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for the report and trajectory CSVs; the report goes to stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative integrator tolerance; the absolute tolerance becomes tol/100.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Christoffel symbols at `point`.
    Christoffel,
    /// Integrate the geodesic through `germ` along `path`.
    Integrate,
    /// Probe real completeness of `germ` (or each of `germs`) over `horizon`.
    Probe,
    /// Classify coercivity of a warped metric.
    ClassifyWarped,
    /// Clifton-Pohl plane computations.
    CliftonPohl {
        #[command(subcommand)]
        action: CpAction,
    },
    /// Monodromy of the closed-form germ `expr` around the loop `path`.
    Monodromy,
}

#[derive(Debug, Subcommand)]
enum CpAction {
    /// Impulse classification, optionally cross-checked by probing.
    Classify {
        #[arg(long, allow_hyphen_values = true, requires_all = ["beta", "x", "y"])]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires_all = ["alpha", "x", "y"])]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires_all = ["alpha", "beta", "y"])]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires_all = ["alpha", "beta", "x"])]
        y: Option<f64>,
        /// Skip the probe cross-check.
        #[arg(long)]
        no_probe: bool,
    },
}

/// Exit status for failures that are not validation errors.
const NUMERICAL_FAILURE: u8 = 2;

fn thread_pool() -> Result<rayon::ThreadPool, ValidationError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("HOLGEO_THREADS") {
        let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            ValidationError::new(
                "",
                format!("HOLGEO_THREADS must be a positive integer, got {v:?}"),
            )
        })?;
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| ValidationError::new("", e.to_string()))
}

fn load(cli: &Cli) -> Result<Scenario, ValidationError> {
    let sc = match &cli.scenario {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                ValidationError::new("", format!("cannot read {}: {e}", p.display()))
            })?;
            Scenario::from_json(&text)?
        }
        None => Scenario::default(),
    };
    sc.resolve(cli.seed, cli.tol)
}

/// Runs the verb; `Ok(false)` means artifacts were written but the computation stopped early.
fn run(cli: &Cli) -> Result<bool> {
    let sc = load(cli)?;
    let pool = thread_pool()?;
    let out = Output {
        dir: cli.out.clone(),
    };
    let (name, result, ok) = match &cli.verb {
        Verb::Christoffel => ("christoffel", commands::christoffel(&sc)?, true),
        Verb::Integrate => {
            let (r, ok) = commands::integrate(&sc, &out)?;
            ("integrate", r, ok)
        }
        Verb::Probe => ("probe", commands::probe(&sc, &pool)?, true),
        Verb::ClassifyWarped => ("classify-warped", commands::classify_warped(&sc)?, true),
        Verb::Monodromy => ("monodromy", commands::monodromy_cmd(&sc)?, true),
        Verb::CliftonPohl {
            action:
                CpAction::Classify {
                    alpha,
                    beta,
                    x,
                    y,
                    no_probe,
                },
        } => {
            let single = match (alpha, beta, x, y) {
                (Some(a), Some(b), Some(x), Some(y)) => Some(CPInitial::new(*a, *b, *x, *y)),
                _ => None,
            };
            let args = CpArgs {
                single,
                probe: !no_probe,
            };
            (
                "clifton-pohl classify",
                commands::clifton_pohl_classify(&sc, &args, &out, &pool)?,
                true,
            )
        }
    };
    let report = to_json(&Report::new(name, &sc, result)).context("serializing the report")?;
    let file = format!("{}.json", name.replace(' ', "_"));
    out.write(&file, &report)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: integration stopped before the end of the path (see the report)");
            ExitCode::from(NUMERICAL_FAILURE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ValidationError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(NUMERICAL_FAILURE)
            }
        }
    }
}
