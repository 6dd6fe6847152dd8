use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use grassradon_cli::{all_pass, defaults, run_experiment, write_csv, ExperimentSpec, Pipeline};

/// Experiments with Radon transforms between affine Grassmannians.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML spec and write its CSV report.
    Run { spec: PathBuf },
    /// Run the built-in self test (remark values and Erdélyi–Kober identities).
    Selftest {
        /// CSV destination.
        #[arg(long, default_value = "selftest.csv")]
        output: PathBuf,
    },
    /// Print the table of defaults.
    Defaults,
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GRASSRADON_THREADS") {
        let threads: usize = v.parse().with_context(|| format!("GRASSRADON_THREADS={v:?} is not a number"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn execute(spec: &ExperimentSpec) -> Result<bool> {
    let rows = run_experiment(spec)?;
    let path = spec.output_path();
    write_csv(&rows, &path)?;
    let failed = rows.iter().filter(|r| !r.pass()).count();
    println!("{}: {} rows, {failed} failed → {}", spec.name, rows.len(), path.display());
    Ok(all_pass(&rows))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match cli.command {
        Command::Run { spec } => execute(&ExperimentSpec::from_file(&spec)?),
        Command::Selftest { output } => {
            let spec = ExperimentSpec::from_toml(&format!(
                "name = \"selftest\"\npipeline = \"{}\"\noutput = {:?}\n[config]\nn = 3\nk = 1\nk_prime = 2\n",
                Pipeline::Selftest.name(),
                output.display().to_string()
            ))?;
            execute(&spec)
        }
        Command::Defaults => {
            print!("{}", defaults::table());
            Ok(true)
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
