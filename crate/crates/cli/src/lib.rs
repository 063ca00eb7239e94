//! Command-line front end for `mtprep_core`.

pub mod args;
pub mod commands;
pub mod error;
pub mod http;
pub mod io;
pub mod pipeline;

use args::{Cli, Command};
use error::CliResult;

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Normalize(a) => commands::normalize(a),
        Command::Filter(a) => commands::filter(a),
        Command::Stats(a) => commands::stats(a),
        Command::Augment(a) => commands::augment(a),
        Command::Score(a) => commands::score(a),
        Command::Pipeline(a) => pipeline::run(a),
    }
}
