//! Unsupervised, batch-oriented template mining for security event logs with
//! a completion-model backend, and an evaluator that judges any detected
//! template set against ground truth.
//!
//! * [`template`]: the template type, matching and comparison relations.
//! * [`ingest`]: syslog header stripping, per-application partitions,
//!   template-list files.
//! * [`llm`]: prompt construction, completion backends, candidate extraction.
//! * [`mining`]: the two-pass mining loop.
//! * [`eval`]: template accuracy with relaxations, F1, grouping accuracy and
//!   error classes.

pub mod eval;
pub mod ingest;
pub mod llm;
pub mod mining;
pub mod par;
pub mod template;

pub use ingest::{GroundTruth, LogMessage, Partition};
pub use par::Exec;
pub use template::{MatchSet, Template, Token};
