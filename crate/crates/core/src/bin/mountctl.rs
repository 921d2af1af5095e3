use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mountctl::error::exit;
use mountctl::harness::{self, ExperimentConfig, Overrides, ParamSource};
use mountctl::{Error, Result};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  bad command-line usage
  3  invalid or unreadable config, gain or fuzzy definition file
  4  simulation diverged or failed numerically
  5  an artifact could not be written
  6  compare finished but at least one controller failed";

#[derive(Parser)]
#[command(name = "mountctl", version, about = "Telescope mount controller simulation and tuning", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory, overriding `output_dir` in the config
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// GA seed, overriding `seed` in the config
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Print nothing on success
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one controller and write trace, metrics and summary
    Simulate { config: PathBuf },
    /// Tune one ga-pd or ga-flc controller, then simulate the result
    Tune { config: PathBuf },
    /// Run two or more controllers and write a comparison table
    Compare { config: PathBuf },
    /// Print the version
    Version,
}

fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(overrides);
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32> {
    let overrides = Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
    };
    let say = |s: &str| {
        if !cli.quiet {
            print!("{s}");
        }
    };
    match &cli.command {
        Command::Version => {
            println!("mountctl {}", env!("CARGO_PKG_VERSION"));
            Ok(exit::OK)
        }
        Command::Simulate { config } => {
            let report = harness::run_experiment_with(&load(config, &overrides)?)?;
            say(&report.summary);
            Ok(exit::OK)
        }
        Command::Tune { config } => {
            let cfg = load(config, &overrides)?;
            if !cfg.controllers.iter().all(|c| matches!(c.source, ParamSource::Tune(_))) {
                return Err(Error::Usage(format!(
                    "{}: tune needs a ga-pd or ga-flc controller with source = tune",
                    config.display()
                )));
            }
            let report = harness::run_experiment_with(&cfg)?;
            say(&report.summary);
            Ok(exit::OK)
        }
        Command::Compare { config } => {
            let report = harness::run_comparison_with(&load(config, &overrides)?)?;
            say(&report.table.to_text());
            for (kind, e) in &report.failures {
                eprintln!("mountctl: {} failed: {e}", kind.display_name());
            }
            Ok(if report.failures.is_empty() { exit::OK } else { exit::PARTIAL })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(&cli).unwrap_or_else(|e| {
        eprintln!("mountctl: error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
