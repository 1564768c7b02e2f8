//! `gridlay` command-line driver. Exit codes: 0 success, 2 bad input or
//! usage, 3 numeric failure.

mod args;
mod commands;
mod error;
mod input;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;
use manifest::Recorder;

fn run(mut command: Command) -> Result<(), CliError> {
    if let Command::Rerun(r) = &command {
        let mut replay = manifest::load(&r.manifest)?.config;
        if let Some(out) = &r.out {
            replay.set_out_dir(out.clone());
        }
        command = replay;
    }
    command.absolutize().map_err(|e| CliError::Input(format!("cannot resolve paths: {e}")))?;
    if let Some(dir) = command.out_dir() {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }

    let mut rec = Recorder::default();
    match &command {
        Command::Layout(a) => commands::layout(a, &mut rec)?,
        Command::Hlayout(a) => commands::hlayout(a, &mut rec)?,
        Command::Augment(a) => commands::augment_corpus(a, &mut rec)?,
        Command::Stats(a) => {
            commands::stats(a, &mut rec)?;
        }
        Command::Render(a) => commands::render_layout(a, &mut rec)?,
        Command::Bench(a) => commands::bench(a, &mut rec)?,
        Command::Rerun(_) => return Err(CliError::Input("a manifest cannot record a rerun".into())),
    }
    if let Some(dir) = command.out_dir() {
        rec.finish(&command, dir)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
