//! `shelab`: command-line driver for the spectral, weak-form and heat
//! equation studies in `shelab-core`.
//!
//! Every output starts with a metadata block holding the flags as given
//! and the values derived from them, so a recorded run can be repeated
//! byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod table;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command, Common};
use error::{AppError, AppResult};

fn common(cmd: &Command) -> (&'static str, &Common) {
    match cmd {
        Command::Eig(a) => ("eig", &a.common),
        Command::Converge(a) => ("converge", &a.common),
        Command::Mc(a) => ("mc", &a.common),
        Command::Weakform(a) => ("weakform", &a.common),
        Command::She(a) => ("she", &a.common),
    }
}

fn run(cli: &Cli) -> AppResult<()> {
    let (name, c) = common(&cli.command);
    if let Some(threads) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| AppError::Usage(format!("--threads: {e}")))?;
    }
    let outcome = match &cli.command {
        Command::Eig(a) => commands::eig(a),
        Command::Converge(a) => commands::converge(a),
        Command::Mc(a) => commands::mc(a),
        Command::Weakform(a) => commands::weakform(a),
        Command::She(a) => commands::she(a),
    }?;
    let mut meta = commands::echo_common(name, c);
    if let Value::Object(m) = &mut meta {
        m.insert("resolved".into(), outcome.resolved);
    }
    let text = outcome.table.render(&meta, c.format);
    match &c.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AppError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| AppError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shelab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
