//! `sinnamon` command-line driver.
//!
//! Failures print one line, `error: code=<name> msg=<text>`, and exit with:
//!
//! | code | name | cause |
//! |------|------|-------|
//! | 2 | `usage` | bad or contradictory flags, invalid parameters |
//! | 3 | `io` | file system errors |
//! | 4 | `format` | malformed vector, run or qrels files, invalid vectors |
//! | 5 | `index` | index file problems, duplicate or unknown ids |
//! | 6 | `analysis` | quadrature failure, degenerate statistics |
//! | 7 | `storage` | a live vector missing from the vector store |

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// A flag combination rejected before any work is done.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    use sinnamon::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return ("usage", 2);
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return ("io", 3);
    }
    match err.downcast_ref::<E>() {
        Some(E::InvalidConfig(_) | E::InvalidParams(_)) => ("usage", 2),
        Some(E::Io(_)) => ("io", 3),
        Some(E::Format(_) | E::InvalidVector { .. } | E::CoordOutOfRange { .. } | E::NegativeValue { .. }) => {
            ("format", 4)
        }
        Some(E::IndexFile(_) | E::DuplicateId(_) | E::UnknownId(_) | E::SlotsExhausted) => ("index", 5),
        Some(E::Quadrature { .. } | E::ZeroVariance) => ("analysis", 6),
        Some(E::StorageMiss(_)) => ("storage", 7),
        None => ("internal", 1),
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: code=usage msg={}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (name, code) = classify(&err);
            eprintln!("error: code={name} msg={}", one_line(&format!("{err:#}")));
            ExitCode::from(code)
        }
    }
}
