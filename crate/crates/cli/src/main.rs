//! `motifhash`: command-line front end for the private graph synthesis and
//! hash distillation pipeline.
//!
//! Exit codes: 0 success, 1 I/O or format failure, 2 usage error,
//! 3 invariant violation.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes that map onto distinct exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Violation(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Violation(m) => write!(f, "invariant violation: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return match f {
            Failure::Usage(_) => 2,
            Failure::Violation(_) => 3,
        };
    }
    match err.downcast_ref::<motifhash_core::Error>() {
        Some(motifhash_core::Error::InvalidInput(_)) => 2,
        Some(motifhash_core::Error::Invariant(_)) | Some(motifhash_core::Error::SupportMismatch(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(a) => commands::gen_data(a),
        Command::BuildGraph(a) => commands::build_graph(a),
        Command::Synthesize(a) => commands::synthesize(a),
        Command::Distill(a) => commands::distill(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::AuditSensitivity(a) => commands::audit_sensitivity(a),
        Command::Pipeline(a) => commands::pipeline(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
