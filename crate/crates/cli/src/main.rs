//! `fse`: encrypt, decrypt, analyze, bound, verify, and sweep individual
//! sequences with the finite-state encryption toolkit.

mod commands;
mod symio;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

const EXIT_CODES: &str = "\
Exit codes:
  0   success
  2   command-line usage error
  3   file I/O failure
  4   key tape exhausted
  5   rate too low for the payload
  6   malformed container or stream
  7   binned decode found no unique answer
  8   a verification verdict failed
  9   enumeration guard exceeded
  10  invalid input or parameters";

#[derive(Parser)]
#[command(name = "fse", version, about = "Finite-state encryption toolkit", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report parse complexity, conditionally on side information with --si
    Analyze(commands::AnalyzeArgs),
    /// Encrypt a file into a cryptogram container
    Encrypt(commands::EncryptArgs),
    /// Decrypt a cryptogram container back into a file
    Decrypt(commands::DecryptArgs),
    /// Evaluate the key-rate lower bound and its term breakdown
    Bounds(commands::BoundsArgs),
    /// Evaluate the bound over power-of-two prefixes, as CSV
    Sweep(commands::SweepArgs),
    /// Run the losslessness and secrecy verifiers on a machine
    Verify(commands::VerifyArgs),
    /// Find the least complex reproduction within a distortion budget
    Rd(commands::RdArgs),
    /// Fill a key file from OS randomness and reset its cursor
    GenKey(commands::GenKeyArgs),
}

#[derive(Debug)]
pub enum CliError {
    Core(fse_core::Error),
    Usage(String),
    DecodeFailed,
    VerifyFailed,
}

pub type CliResult<T> = Result<T, CliError>;

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Usage(msg) => write!(f, "{}", msg),
            CliError::DecodeFailed => write!(f, "decode failed: no unique bin member"),
            CliError::VerifyFailed => write!(f, "verification failed"),
        }
    }
}

impl From<fse_core::Error> for CliError {
    fn from(e: fse_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

fn exit_code(e: &CliError) -> u8 {
    use fse_core::Error;
    match e {
        CliError::Usage(_) => 2,
        CliError::DecodeFailed => 7,
        CliError::VerifyFailed => 8,
        CliError::Core(err) => match err {
            Error::Io(_) => 3,
            Error::KeyExhausted { .. } => 4,
            Error::RateOverflow { .. } => 5,
            Error::MalformedContainer(_) | Error::MalformedStream(_) => 6,
            Error::GuardExceeded { .. } => 9,
            _ => 10,
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Analyze(a) => commands::analyze(a),
        Cmd::Encrypt(a) => commands::encrypt(a),
        Cmd::Decrypt(a) => commands::decrypt(a),
        Cmd::Bounds(a) => commands::bounds(a),
        Cmd::Sweep(a) => commands::sweep(a),
        Cmd::Verify(a) => commands::verify(a),
        Cmd::Rd(a) => commands::rd(a),
        Cmd::GenKey(a) => commands::gen_key(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
