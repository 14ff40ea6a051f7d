mod args;
mod commands;

use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde::de::DeserializeOwned;

use args::{Cli, Command};

/// A problem with the invocation itself; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> anyhow::Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read --config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("invalid --config {}: {e}", path.display())))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Schedule(o) => commands::schedule(o.or(load_config(config)?)),
        Command::Eval(o) => commands::eval(o.or(load_config(config)?)),
        Command::Bounds(o) => commands::bounds(o.or(load_config(config)?)),
        Command::Experiment(o) => commands::experiment(o.or(load_config(config)?)),
        Command::Verify(o) => commands::verify(o.or(load_config(config)?)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
