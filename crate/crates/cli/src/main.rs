use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use frontera_cli::{run, RunOptions, Subcommand};

/// Spectral thresholds and free-boundary simulation for the nonlocal SIS model.
#[derive(Debug, Parser)]
#[command(name = "frontera", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; the OUTPUT_DIR environment variable overrides it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record full field snapshots during simulations.
    #[arg(long)]
    snapshots: bool,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": "usage", "message": message, "exitCode": 2 }));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let first = e.to_string();
            return usage_error(first.lines().next().unwrap_or("invalid arguments"));
        }
    };
    let out = match std::env::var_os("OUTPUT_DIR").filter(|v| !v.is_empty()) {
        Some(dir) => PathBuf::from(dir),
        None => match cli.out {
            Some(dir) => dir,
            None => return usage_error("--out is required unless OUTPUT_DIR is set"),
        },
    };
    let opts = RunOptions {
        subcommand: cli.subcommand,
        config: &cli.config,
        out,
        snapshots: cli.snapshots,
        seed: cli.seed,
    };
    match run(&opts) {
        Ok((_, line)) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
