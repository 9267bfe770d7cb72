mod args;
mod commands;
mod error;
mod io;
mod manifest;
mod verify;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};
use manifest::RunManifest;

fn dispatch(command: &Command) -> CliResult<()> {
    match command {
        Command::Embed(a) => commands::embed(a, command),
        Command::Rip(a) => commands::rip(a, command),
        Command::Verify(a) => verify::verify(a, command),
        Command::Sweep(a) => commands::sweep(a, command),
        Command::Replay(a) => {
            let mut recorded = RunManifest::read(&a.manifest)?.params;
            if matches!(recorded, Command::Replay(_)) {
                return Err(CliError::Io("a manifest cannot record a replay".into()));
            }
            if let Some(path) = &a.output {
                recorded.set_output(path.clone());
            }
            dispatch(&recorded)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    let result = ripjl::harness::with_jobs(cli.jobs, || dispatch(&cli.command))
        .map_err(CliError::from)
        .and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
