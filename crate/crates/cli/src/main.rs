use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser};
use rydsim_cli::config::{default_config, parse_config, schema_help, Experiment};
use rydsim_cli::run::run_experiment;

/// Lattice contagion and mean-field optics experiments.
#[derive(Parser, Debug)]
#[command(name = "sim", version)]
struct Cli {
    /// sis-scan | sir-run | gradient-snapshot | multi-domain-scan | hysteresis | multistability-map | fit
    experiment: Experiment,
    /// TOML config; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides run.seed.
    #[arg(long, env = "SIM_SEED")]
    seed: Option<u64>,
    /// Output directory [default: out/<experiment>].
    #[arg(long, env = "SIM_OUT")]
    out: Option<PathBuf>,
    /// Forces single-threaded execution.
    #[arg(long, env = "SIM_SERIAL")]
    serial: bool,
}

fn main() -> ExitCode {
    let command = Cli::command().after_help(schema_help());
    let cli = match Cli::from_arg_matches(&command.get_matches()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };

    let mut config = match &cli.config {
        None => default_config(cli.experiment),
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            match parse_config(&text, cli.experiment) {
                Ok(c) => c,
                Err(e) => {
                    eprint!("{}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if cli.serial {
        config.run.parallel = false;
    }
    let out = cli.out.unwrap_or_else(|| PathBuf::from("out").join(cli.experiment.name()));

    match run_experiment(&config, cli.experiment, &out) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!("wrote {} file(s) and manifest.txt to {}", outcome.files.len(), out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{} failed: {e} (partial manifest in {})", cli.experiment.name(), out.display());
            ExitCode::FAILURE
        }
    }
}
