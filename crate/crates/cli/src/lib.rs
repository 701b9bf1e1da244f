//! Command-line front end: argument parsing, run configuration, output
//! directories and the subcommand implementations.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use args::Cli;
pub use config::{parse_run_config, RunConfig};
pub use error::{CliError, Result};

use output::OutputDir;

/// Resolves the configuration and runs the command on a pool of the
/// requested size.
pub fn execute(cli: &Cli) -> Result<serde_json::Value> {
    let cfg = cli.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    let out = OutputDir::new(&cli.global.out, cli.global.force);
    pool.install(|| commands::run(&cfg, &out))
}
