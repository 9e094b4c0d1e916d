use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use tangle_compliance::error::Result;
use tangle_compliance::harness::scenario::NetworkSpec;
use tangle_compliance::harness::{run, validate, RunOptions, Scenario};
use tangle_compliance::stability::{count_roots, equation};

#[derive(Parser)]
#[command(name = "tangle-sim", version, about = "Tangle growth and compliance-control simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write CSV output plus summary.json.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Compare agent-based and reduced-model ensembles.
    Validate {
        agent: PathBuf,
        reduced: PathBuf,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Check the sufficient stability condition of a compliance network.
    Stability { network: PathBuf },
    /// Count roots of a characteristic equation in a rectangle.
    Roots {
        /// mean-mode:h=H, zero-sum-mode:h=H or poly:c_n,...,c_0
        equation: String,
        #[arg(long, allow_hyphen_values = true)]
        re_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        re_max: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        im_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        im_max: Option<f64>,
    },
}

#[derive(Serialize)]
struct RootsReport {
    equation: String,
    re: (f64, f64),
    im: (f64, f64),
    count: i64,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn verdict(pass: bool) -> ExitCode {
    println!("{}", if pass { "PASS" } else { "FAIL" });
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            scenario,
            runs,
            seed,
            out,
            workers,
        } => {
            let mut s = Scenario::from_file(&scenario)?;
            if let Some(r) = runs {
                s.set_runs(r);
            }
            if let Some(seed) = seed {
                s.set_seed(seed);
            }
            let summary = run::run_scenario(&s, &RunOptions { out, workers })?;
            print_json(&summary)?;
            Ok(match summary.pass {
                Some(p) => verdict(p),
                None => ExitCode::SUCCESS,
            })
        }
        Command::Validate {
            agent,
            reduced,
            workers,
        } => {
            let report = validate::validate_files(&agent, &reduced, workers)?;
            print_json(&report)?;
            Ok(verdict(report.pass))
        }
        Command::Stability { network } => {
            let spec = NetworkSpec::from_file(&network)?;
            let report = run::stability_report(&spec, None)?;
            print_json(&report)?;
            Ok(verdict(report.pass))
        }
        Command::Roots {
            equation,
            re_min,
            re_max,
            im_min,
            im_max,
        } => {
            let eq = equation::parse(&equation)?;
            let mut region = eq.default_region;
            region.re = (re_min.unwrap_or(region.re.0), re_max.unwrap_or(region.re.1));
            region.im = (im_min.unwrap_or(region.im.0), im_max.unwrap_or(region.im.1));
            let count = count_roots(&eq.f, &region)?;
            print_json(&RootsReport {
                equation: eq.label,
                re: region.re,
                im: region.im,
                count,
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
