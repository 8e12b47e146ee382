//! Command-line front end for BTCP experiments.
//!
//! Commands: `train` (three-stage training over seeds, writing a manifest
//! and per-seed reports), `compare` (seed-averaged metric table per method),
//! `hist` (uncertainty histogram CSV) and `ood` (average uncertainty on
//! in-distribution vs OOD data). Exit status is 0 on success, 1 on runtime
//! failure and 2 on usage errors.

pub mod args;
pub mod commands;
mod error;
pub mod manifest;
pub mod settings;

pub use error::CliError;

use args::{Cli, Command};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Train(a) => commands::train(a).map(drop),
        Command::Compare(a) => commands::compare(a).map(drop),
        Command::Hist(a) => commands::hist(a),
        Command::Ood(a) => commands::ood(a).map(drop),
    }
}
