//! `tappy`: lint-style checks of touch-target sizes against a predicted tap
//! success rate.
//!
//! Exit codes: 0 when everything passes, 1 when an element is below the
//! threshold, 2 on usage, input or parse errors.

mod args;
mod commands;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = match cli.command {
        Command::Analyze(a) => commands::analyze(&a, cli.devices.as_deref(), &mut out, &mut err),
        Command::Predict(p) => commands::predict(&p, cli.devices.as_deref(), &mut out, &mut err),
        Command::SizeFor(s) => commands::size_for(&s, cli.devices.as_deref(), &mut out, &mut err),
        Command::Devices => commands::devices(cli.devices.as_deref(), &mut out, &mut err),
        Command::Serve(s) => {
            drop(out);
            commands::serve(&s, cli.devices.as_deref(), &mut err)
        }
    };
    let _ = err.flush();
    ExitCode::from(code)
}
