use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use levy_extrema::config::{Command, RunConfig};
use levy_extrema::{output_dir, run, RunError, OUT_ENV};

/// Extrema densities and ruin probabilities of stopped Lévy processes.
#[derive(Debug, Parser)]
#[command(name = "levy-extrema", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the environment and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for `validate`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = RunConfig::load(&cli.config).map_err(RunError::from).and_then(|config| {
        let env = std::env::var(OUT_ENV).ok();
        let out = output_dir(cli.out.as_deref(), env.as_deref(), &config);
        run(cli.command, &config, &out, cli.seed).map(|_| out)
    });
    match result {
        Ok(out) => {
            println!("{}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
