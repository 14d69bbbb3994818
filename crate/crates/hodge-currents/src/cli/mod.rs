//! The `hodge` command line: `run`, `validate` and `cache`.

pub mod config;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{Built, Scenario, SCHEMA_VERSION};
pub use report::{OperationReport, OperationResult, RunReport};
pub use run::{run_scenario, validate_scenario, RunOptions};

use crate::error::{Error, Result};
use crate::hefer::HeferCache;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hodge",
    version,
    about = "Hodge decomposition of residual currents"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for the JSON report; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism, or the scenario value).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Multiplies the acceptance tolerances.
    #[arg(long, default_value_t = 1.0)]
    pub tolerance_scale: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every operation listed in the scenario.
    Run(RunArgs),
    /// Check reducedness, currents and sections without running operations.
    Validate(RunArgs),
    /// Inspect or clear the Hefer cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Subcommand, Clone, Copy)]
pub enum CacheAction {
    Inspect,
    Clear,
}

fn workers(args: &RunArgs, scenario: &Scenario) -> usize {
    args.workers
        .or(scenario.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn write_report(report: &RunReport, out: Option<&Path>, name: &str) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{name}.json"));
            std::fs::write(&path, text + "\n")?;
            eprintln!("report written to {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn summary(report: &RunReport) {
    for op in &report.values.operations {
        let status = if op.pass { "ok" } else { "FAIL" };
        match &op.error {
            Some(e) => eprintln!("[{status}] #{} {}: {e}", op.index, op.op),
            None => eprintln!("[{status}] #{} {}", op.index, op.op),
        }
    }
    eprintln!(
        "{}: {}",
        report.values.scenario,
        if report.pass() { "pass" } else { "fail" }
    );
}

/// Runs (or validates) a scenario file with the given flags; returns the exit code.
pub fn execute(args: &RunArgs, validate_only: bool) -> u8 {
    let scenario = match Scenario::load(&args.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    if !(args.tolerance_scale.is_finite() && args.tolerance_scale > 0.0) {
        eprintln!("--tolerance-scale must be positive");
        return EXIT_CONFIG;
    }
    let opts = RunOptions {
        seed: args.seed,
        tolerance_scale: args.tolerance_scale,
        cache: HeferCache::from_env(),
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(workers(args, &scenario))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return EXIT_FAIL;
        }
    };
    let result = pool.install(|| {
        if validate_only {
            validate_scenario(&scenario, &opts)
        } else {
            run_scenario(&scenario, &opts)
        }
    });
    let report = match result {
        Ok(r) => r,
        Err(e @ Error::Config { .. }) => {
            eprintln!("{}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return EXIT_FAIL;
        }
    };
    if let Err(e) = write_report(&report, args.out.as_deref(), &scenario.name) {
        eprintln!("{e}");
        return EXIT_FAIL;
    }
    summary(&report);
    if report.pass() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn cache(action: CacheAction) -> u8 {
    let c = HeferCache::from_env();
    match action {
        CacheAction::Inspect => match c.inspect() {
            Ok(entries) => {
                let out = serde_json::json!({ "dir": c.dir(), "entries": entries });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out).expect("serializes")
                );
                EXIT_OK
            }
            Err(e) => {
                eprintln!("{e}");
                EXIT_FAIL
            }
        },
        CacheAction::Clear => match c.clear() {
            Ok(k) => {
                eprintln!("removed {k} entries from {}", c.dir().display());
                EXIT_OK
            }
            Err(e) => {
                eprintln!("{e}");
                EXIT_FAIL
            }
        },
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run(a) => execute(a, false),
        Command::Validate(a) => execute(a, true),
        Command::Cache { action } => cache(*action),
    };
    ExitCode::from(code)
}
