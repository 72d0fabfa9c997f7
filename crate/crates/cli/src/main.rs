//! `llmtd`: mine templates from a syslog file with a completion backend, and
//! score detected templates against ground truth.

mod diff;
mod evaluate;
mod mine;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "llmtd", version, about = "Log template mining and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mine templates from a log, one partition per application.
    Mine(mine::MineArgs),
    /// Score detected templates against ground truth.
    Eval(evaluate::EvalArgs),
    /// Show the error class of every incorrect detected template.
    Classify(evaluate::EvalArgs),
    /// Re-run a recorded mining run and compare it with its stored output.
    Replay(mine::ReplayArgs),
}

/// How log lines are turned into messages.
#[derive(Args, Debug, Clone, Default)]
pub struct IngestArgs {
    /// Lines start directly at the syslog tag; skip RFC 3164 header removal.
    #[arg(long)]
    pub no_header: bool,
    /// Regex removed from the start of every line before header handling,
    /// e.g. an ISO-8601 timestamp and hostname.
    #[arg(long, value_name = "REGEX")]
    pub strip_prefix: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    Http,
    Scripted,
    Oracle,
}

#[derive(Args, Debug, Clone)]
pub struct EvalPaths {
    /// Event log the templates are evaluated on.
    #[arg(long, value_name = "PATH")]
    pub log: PathBuf,
    /// Ground-truth templates, one per line.
    #[arg(long, value_name = "PATH")]
    pub truth: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mine(args) => mine::run_mine(&args),
        Command::Eval(args) => evaluate::run_eval(&args),
        Command::Classify(args) => evaluate::run_classify(&args),
        Command::Replay(args) => mine::run_replay(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("llmtd: {:#}", failure.error);
            ExitCode::from(failure.kind.code())
        }
    }
}
