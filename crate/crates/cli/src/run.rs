//! Exit codes, input loading and small file helpers shared by the commands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use llmtd_core::ingest::{read_log, HeaderMode, IngestOptions};
use llmtd_core::LogMessage;
use regex::Regex;
use sha2::{Digest, Sha256};

use crate::IngestArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Bad arguments or unreadable / unwritable files.
    Usage,
    /// The completion backend could not be used.
    Backend,
    /// A replay did not reproduce its snapshot.
    Mismatch,
}

impl FailureKind {
    pub fn code(self) -> u8 {
        match self {
            FailureKind::Usage => 1,
            FailureKind::Backend => 2,
            FailureKind::Mismatch => 3,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(kind: FailureKind, error: anyhow::Error) -> Failure {
        Failure { kind, error }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Failure {
        Failure::new(FailureKind::Usage, error)
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn ingest_options(args: &IngestArgs) -> anyhow::Result<IngestOptions> {
    let strip_prefix = args
        .strip_prefix
        .as_deref()
        .map(|p| Regex::new(p).with_context(|| format!("invalid --strip-prefix {p:?}")))
        .transpose()?;
    Ok(IngestOptions {
        header: if args.no_header {
            HeaderMode::NoHeader
        } else {
            HeaderMode::Syslog
        },
        strip_prefix,
    })
}

/// Reads and parses a log, reporting refused lines on stderr.
pub fn load_messages(path: &Path, args: &IngestArgs) -> anyhow::Result<Vec<LogMessage>> {
    let report = read_log(path, &ingest_options(args)?)?;
    for (line, err) in &report.rejected {
        log::warn!("{}:{}: skipped: {err}", path.display(), line + 1);
    }
    if !report.rejected.is_empty() {
        eprintln!(
            "llmtd: {} line(s) of {} skipped",
            report.rejected.len(),
            path.display()
        );
    }
    if report.messages.is_empty() {
        return Err(anyhow!("{}: no messages", path.display()));
    }
    Ok(report.messages)
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn create_dir(path: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

/// File-system-safe name for an application tag.
pub fn file_stem(app: &str) -> String {
    app.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_owned())
}
