//! Command-line front-end for the `sdot` library.
//!
//! Every command reads JSON inputs (files or inline text), writes its output
//! atomically, and writes a [`manifest::RunManifest`] to `<out>.manifest.json`.
//! Failures print `{"error": {...}}` on stderr and exit with the status of
//! [`error::ErrorKind`].

pub mod commands;
pub mod error;
pub mod formats;
pub mod manifest;

use clap::{Parser, Subcommand};

use commands::generate::GenerateArgs;
use commands::render::RenderArgs;
use commands::solve::ProblemArgs;
use commands::validate::ValidateArgs;
pub use error::{CliError, CliResult, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "sdot", version, about = "Semi-discrete optimal transport in the plane")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the transport map and write a result file
    Solve(ProblemArgs),
    /// Sample the generative pushforward of a solved result as CSV
    Generate(GenerateArgs),
    /// Solve and write only the Wasserstein distance
    Wasserstein(ProblemArgs),
    /// Re-run oracle checks against a result file
    Validate(ValidateArgs),
    /// Draw a result as SVG
    Render(RenderArgs),
}

/// Runs one command and returns a one-line JSON summary.
pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Solve(a) => commands::solve::run_solve(a),
        Command::Generate(a) => commands::generate::run_generate(a),
        Command::Wasserstein(a) => commands::solve::run_wasserstein(a),
        Command::Validate(a) => commands::validate::run_validate(a),
        Command::Render(a) => commands::render::run_render(a),
    }
}
