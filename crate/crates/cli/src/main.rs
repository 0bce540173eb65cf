//! `d2dlb`: experiment harness for spectrum provisioning with D2D load balancing.
//!
//! Exit codes: 0 success, 2 invariant or bound violation, 3 solver failure, 4
//! configuration error.

mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use config::{Cli, Command};
use error::CliError;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Help and version requests go to stdout and exit 0.
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            std::process::exit(CliError::Config(String::new()).exit_code());
        }
    };
    let result = match &cli.command {
        Command::Nd(a) => commands::cmd_nd(a),
        Command::D2d(a) => commands::cmd_d2d(a),
        Command::Heuristic(a) => commands::cmd_heuristic(a),
        Command::Bounds(a) => commands::cmd_bounds(a),
        Command::Generate(a) => commands::cmd_generate(a),
        Command::LpDump(a) => commands::cmd_lp_dump(a),
    };
    match result {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
