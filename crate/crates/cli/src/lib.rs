//! Command-line driver: config ingestion, subcommand dispatch and
//! deterministic output files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod record;

use std::path::{Path, PathBuf};
use std::time::SystemTime;

use thiserror::Error;

use commands::CommandError;
pub use commands::Subcommand;
use config::ConfigError;
use record::{RunRecord, Summary};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("cannot write outputs: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 1 for failures during the computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Command(CommandError::Missing(_)) => 2,
            CliError::Command(CommandError::Compute(_)) | CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Io { .. }) => "config_io",
            CliError::Config(ConfigError::Parse(_)) => "parse",
            CliError::Config(ConfigError::Validation { .. }) => "validation",
            CliError::Command(CommandError::Missing(_)) => "usage",
            CliError::Command(CommandError::Compute(_)) => "computation",
            CliError::Io(_) => "io",
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string(), "exitCode": self.exit_code() })
            .to_string()
    }
}

pub struct RunOptions<'a> {
    pub subcommand: Subcommand,
    pub config: &'a Path,
    pub out: PathBuf,
    pub snapshots: bool,
    pub seed: Option<u64>,
}

/// Runs one subcommand end to end; returns the record and the line for
/// standard output.
pub fn run(opts: &RunOptions) -> Result<(RunRecord, String), CliError> {
    let started_at = SystemTime::now();
    let (mut cfg, bytes) = config::parse_config(opts.config)?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let outcome = commands::dispatch(opts.subcommand, &cfg, opts.snapshots)?;
    let summary = Summary {
        subcommand: opts.subcommand.name(),
        config_hash: record::config_hash(&bytes),
        results: outcome.results,
        warnings: outcome.warnings,
    };
    let mut files = outcome.files;
    files.push((record::SUMMARY_FILE.into(), record::to_json(&summary)));
    let mut outputs: Vec<String> = files.iter().map(|(name, _)| name.clone()).collect();
    outputs.push(record::RECORD_FILE.into());
    let rec = RunRecord {
        config_hash: summary.config_hash.clone(),
        subcommand: summary.subcommand.clone(),
        started_at,
        outputs,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
    };
    files.push((record::RECORD_FILE.into(), record::to_json(&rec)));
    record::write_all(&opts.out, &files)?;
    let line = match outcome.stdout {
        Some(v) => v.to_string(),
        None => serde_json::to_string(&summary).unwrap_or_default(),
    };
    Ok((rec, line))
}
