//! `trc`: runs temporal-relational classification experiments described by
//! a flat configuration file.

mod commands;
mod config;
mod experiment;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use commands::{execute, exit_code, Command, Plan};
use config::{Diagnostic, RawConfig};

#[derive(Parser)]
#[command(name = "trc", version, about = "Temporal-relational classification experiments")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file.
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Temporal evaluation protocol.
    Evaluate(RunArgs),
    /// Kernel parameter selection by cross-validation.
    Cv(RunArgs),
    /// Temporal ensemble evaluation.
    Ensemble(RunArgs),
    /// Randomization significance ranking.
    Significance(RunArgs),
    /// Temporal granularity sweeps.
    Sweep(RunArgs),
    /// Temporal link statistics.
    Stats(RunArgs),
    /// Synthetic dataset generation.
    Synth(RunArgs),
    /// Reports every problem in a configuration.
    Validate {
        config: PathBuf,
        /// Subcommand the configuration is meant for.
        #[arg(long = "for", value_enum, default_value = "evaluate")]
        target: Command,
    },
    /// Prints the configuration key reference.
    Keys,
}

fn load_config(path: &Path) -> Result<(RawConfig, Vec<Diagnostic>), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new(""));
    Ok(RawConfig::parse(&text, base))
}

fn read_plan(command: Command, config: &Path) -> Result<Plan, Vec<String>> {
    let (raw, mut diags) = load_config(config).map_err(|e| vec![e])?;
    let seed = std::env::var("TRC_SEED").ok();
    match Plan::read(command, &raw, seed.as_deref()) {
        Ok(plan) if diags.is_empty() => Ok(plan),
        Ok(_) => Err(diags.iter().map(ToString::to_string).collect()),
        Err(more) => {
            diags.extend(more);
            Err(diags.iter().map(ToString::to_string).collect())
        }
    }
}

fn run(command: Command, args: &RunArgs) -> ExitCode {
    let mut plan = match read_plan(command, &args.config) {
        Ok(p) => p,
        Err(msgs) => {
            for m in msgs {
                error!("{m}");
            }
            return ExitCode::from(2);
        }
    };
    if let Some(out) = &args.out {
        plan.output = Some(out.clone());
    }
    let Some(out_dir) = plan.output.clone() else {
        error!("output.dir: required (or pass --out)");
        return ExitCode::from(2);
    };
    let files = match execute(&plan) {
        Ok(f) => f,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let written = output::manifest(command.name(), plan.seed, &args.config, &plan.inputs(), &files)
        .and_then(|m| output::write_all(&out_dir, &files, &m));
    match written {
        Ok(()) => {
            println!("wrote {} files to {}", files.len() + 1, out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("writing {}: {e}", out_dir.display());
            ExitCode::from(3)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            error!("--jobs: {e}");
            return ExitCode::from(2);
        }
    }
    let (command, args) = match &cli.command {
        Cmd::Evaluate(a) => (Command::Evaluate, a),
        Cmd::Cv(a) => (Command::Cv, a),
        Cmd::Ensemble(a) => (Command::Ensemble, a),
        Cmd::Significance(a) => (Command::Significance, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Stats(a) => (Command::Stats, a),
        Cmd::Synth(a) => (Command::Synth, a),
        Cmd::Validate { config, target } => {
            return match read_plan(*target, config) {
                Ok(_) => {
                    println!("ok");
                    ExitCode::SUCCESS
                }
                Err(msgs) => {
                    for m in msgs {
                        println!("{m}");
                    }
                    ExitCode::from(2)
                }
            };
        }
        Cmd::Keys => {
            print!("{}", config::key_table());
            return ExitCode::SUCCESS;
        }
    };
    run(command, args)
}
