//! Command-line front end for phasesense.

pub mod cli;
pub mod commands;
pub mod grid;
pub mod records;
pub mod reproduce;
pub mod statearg;
pub mod verify;

use anyhow::Result;

use cli::{Cli, Command};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Channel(a) => commands::channel(cli, a),
        Command::FisherScan(a) => commands::fisher_scan(cli, a),
        Command::Decohere(a) => commands::decohere(cli, a),
        Command::Zoo(a) => commands::zoo(cli, a),
        Command::Optimize(a) => commands::optimize(cli, a),
        Command::Reproduce(a) => reproduce::reproduce(cli, a),
        Command::Verify(a) => verify::verify(a),
    }
}
