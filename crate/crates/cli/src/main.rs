use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracemix_cli::run::{self, Overrides};
use tracemix_cli::scenario::parse_tolerance_override;
use tracemix_cli::{sweep, RunError};

#[derive(Parser)]
#[command(
    name = "tracemix",
    version,
    about = "Analyze positive L1-contractions on finite von Neumann algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for reports and CSV files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Tolerance override, e.g. `--tol decay_tol=1e-10`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE", value_parser = parse_tolerance_override)]
    tolerances: Vec<(String, f64)>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write `<prefix>.report.txt` plus CSV exports.
    Run { scenario: PathBuf },
    /// Run a scenario over a parameter grid.
    Sweep { config: PathBuf },
    /// Print a scenario in canonical form.
    Fmt { scenario: PathBuf },
    /// Check a scenario without running it.
    Validate { scenario: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        tolerances: cli.tolerances,
    };
    let result = match &cli.command {
        Command::Run { scenario } => run::run_scenario(scenario, &cli.out_dir, &overrides).map(|(report, files)| {
            for f in files {
                println!("wrote {}", f.display());
            }
            if report.failed() {
                for r in report.records.iter().filter(|r| r.error.is_some()) {
                    let e = r.error.as_ref().expect("filtered");
                    eprintln!("{}: {}: {e}", r.kind.name(), e.kind());
                }
            }
            report.exit_code()
        }),
        Command::Sweep { config } => match sweep::sweep_file(config, &cli.out_dir, &overrides, cli.jobs) {
            Ok((report, files)) => {
                for f in files {
                    println!("wrote {}", f.display());
                }
                println!("{} points, no invariant violations", report.points.len());
                Ok(0)
            }
            Err(e) => Err(e),
        },
        Command::Fmt { scenario } => run::load(scenario, &Overrides::default()).map(|spec| {
            print!("{}", spec.to_canonical());
            0
        }),
        Command::Validate { scenario } => run::load(scenario, &overrides)
            .and_then(|spec| spec.resolve().map(|_| ()))
            .map(|()| {
                println!("ok");
                0
            }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            exit(&e)
        }
    }
}

fn exit(e: &RunError) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
