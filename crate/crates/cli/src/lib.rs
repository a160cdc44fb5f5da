// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: configuration parsing, run modes and CSV output.
//!
//! ```text
//! polarchan <mode> --config <file> [--out <file>] [--jobs N] [--seed S]
//! ```
//!
//! The seed is taken from `--seed`, then the configuration's `seed` key, then
//! the `POLARCHAN_SEED` environment variable, and defaults to 0.

// NaN-rejecting checks read more plainly as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches, Parser};

pub use config::{parse_config, BenchSpec, ConfigError, ConfigErrorKind, Mode, Preset, RunConfig};
pub use run::{
    run, run_feasibility, run_region, run_simulate, run_sweep, run_tomo, RunError, RunOptions,
};
pub use table::Table;

pub const SEED_ENV: &str = "POLARCHAN_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "polarchan",
    version,
    about = "Polarization-qubit depolarizing channel simulator"
)]
pub struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    pub mode: Mode,
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV path; overrides the configuration's `out` key. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Seed for simulated counts; overrides the configuration and POLARCHAN_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn after_help() -> String {
    let modes: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
    let presets: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
    format!(
        "Modes: {}\nPresets: {}\n\nConfiguration files hold `key = value` lines with `#` comments and a\nrequired `mode` key. Benches are a `preset` or repeated `element` lines:\ncrystal(length, angle), hwp(angle), qwp(angle).\n\nExit codes: 0 success, 1 validation error, 2 I/O error.",
        modes.join(", "),
        presets.join(", ")
    )
}

pub fn command() -> clap::Command {
    Cli::command().after_help(after_help())
}

/// Seed precedence: command line, configuration, environment, 0.
pub fn resolve_seed(
    cli: Option<u64>,
    config: &RunConfig,
    env: Option<&str>,
) -> Result<u64, RunError> {
    if let Some(s) = cli.or(config.tomography.as_ref().and_then(|t| t.seed)) {
        return Ok(s);
    }
    match env {
        None => Ok(0),
        Some(v) => v.trim().parse().map_err(|_| {
            RunError::Validation(format!("{SEED_ENV}={v} is not a non-negative integer"))
        }),
    }
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let cli = Cli::from_arg_matches(&matches).expect("matches come from the same command");

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", cli.config.display());
            return 2;
        }
    };
    let config = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                let _ = writeln!(stderr, "error: {}: {e}", cli.config.display());
            }
            return 1;
        }
    };
    if config.mode != cli.mode {
        let _ = writeln!(
            stderr,
            "error: command line mode {} does not match configuration mode {}",
            cli.mode, config.mode
        );
        return 1;
    }

    let env_seed = std::env::var(SEED_ENV).ok();
    let result = resolve_seed(cli.seed, &config, env_seed.as_deref()).and_then(|seed| {
        let table = run(
            &config,
            &RunOptions {
                jobs: cli.jobs,
                seed,
            },
        )?;
        let csv = table.to_csv();
        match cli.out.as_ref().or(config.out.as_ref()) {
            Some(path) => run::write_file(path, &csv),
            None => stdout
                .write_all(csv.as_bytes())
                .map_err(|source| RunError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                }),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
