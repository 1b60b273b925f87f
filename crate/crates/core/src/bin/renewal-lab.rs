use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use renewal_lab::config::ExperimentConfig;
use renewal_lab::runner::{self, Subcommand};
use renewal_lab::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Solve,
    Phi,
    Stone,
    Bt,
    Couple,
    Compensator,
    Krt,
    Rootzen,
    All,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Solve => Subcommand::Solve,
            Command::Phi => Subcommand::Phi,
            Command::Stone => Subcommand::Stone,
            Command::Bt => Subcommand::Bt,
            Command::Couple => Subcommand::Couple,
            Command::Compensator => Subcommand::Compensator,
            Command::Krt => Subcommand::Krt,
            Command::Rootzen => Subcommand::Rootzen,
            Command::All => Subcommand::All,
        }
    }
}

/// Renewal-equation solvers, coupling and compensator diagnostics.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config; optional for `all`, which then uses seed 0.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json and the CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 1 when any check fails.
    #[arg(long)]
    strict: bool,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn config_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let sub = Subcommand::from(cli.command);
    let cfg = match (&cli.config, sub) {
        (Some(path), _) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => return config_error(&e),
        },
        (None, Subcommand::All) => ExperimentConfig::new(None, 0),
        (None, _) => {
            return config_error(&Error::Config {
                path: "--config".into(),
                message: format!("`{sub}` needs a config file"),
            })
        }
    }
    .with_env_seed();
    let report = match runner::run(sub, &cfg) {
        Ok(r) => r,
        Err(e @ Error::Config { .. }) => return config_error(&e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    print!("{}", report.render());
    if let Some(dir) = &cli.out {
        if let Err(e) = report.write(dir) {
            eprintln!("error: writing {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    if report.passed {
        ExitCode::SUCCESS
    } else if cli.strict {
        ExitCode::from(1)
    } else {
        eprintln!("warning: some checks failed (use --strict for a nonzero exit)");
        ExitCode::SUCCESS
    }
}
