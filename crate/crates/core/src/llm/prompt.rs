use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Instruction text with a worked multi-template example, used when no prompt
/// file is given.
pub const DEFAULT_STATIC_PROMPT: &str = include_str!("../../prompts/default_static.txt");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("batch message {0} contains a line break")]
    MultiLineMessage(usize),
}

/// A rendered prompt: the static part verbatim, then one batch message per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prompt {
    pub static_part: String,
    pub batch: Vec<String>,
    pub rendered: String,
}

impl Prompt {
    /// Hex SHA-256 of the rendered text; the key used in exchange files.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.rendered.as_bytes()))
    }
}

pub fn build_prompt<S: AsRef<str>>(batch: &[S], static_part: &str) -> Result<Prompt, PromptError> {
    if batch.is_empty() {
        return Err(PromptError::EmptyBatch);
    }
    let mut rendered = String::with_capacity(
        static_part.len() + batch.iter().map(|m| m.as_ref().len() + 1).sum::<usize>() + 1,
    );
    rendered.push_str(static_part);
    if !static_part.is_empty() && !static_part.ends_with('\n') {
        rendered.push('\n');
    }
    for (i, msg) in batch.iter().enumerate() {
        let msg = msg.as_ref();
        if msg.contains(['\n', '\r']) {
            return Err(PromptError::MultiLineMessage(i));
        }
        rendered.push_str(msg);
        rendered.push('\n');
    }
    Ok(Prompt {
        static_part: static_part.to_owned(),
        batch: batch.iter().map(|m| m.as_ref().to_owned()).collect(),
        rendered,
    })
}
