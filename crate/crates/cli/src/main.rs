mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Experiment, ExperimentConfig};

/// Desk-scale experiments for semilinear transport systems with
/// non-resonant quadratic coupling.
#[derive(Parser)]
#[command(name = "nullwave", version, about)]
struct Cli {
    /// Which experiment to run; must match the config file's `experiment`.
    #[arg(value_enum)]
    experiment: Experiment,

    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,

    /// Directory the report and CSV tables are written to.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Override the config's space step.
    #[arg(long)]
    dx: Option<f64>,

    /// Override the config's time step.
    #[arg(long)]
    dt: Option<f64>,

    /// Override the config's sample seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    // exit 2 is reserved for violated checks, so command-line mistakes are
    // reported as config errors (1) instead of clap's default
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    let mut config = ExperimentConfig::load(&cli.config)?;
    if config.experiment != cli.experiment {
        anyhow::bail!(
            "config describes a `{}` experiment, not `{}`",
            config.experiment.name(),
            cli.experiment.name()
        );
    }
    if let Some(dx) = cli.dx {
        config.grid.dx = dx;
    }
    if let Some(dt) = cli.dt {
        config.grid.dt = dt;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate_shape()?;
    runner::run(&config, &cli.out)
}
