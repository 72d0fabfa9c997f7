//! Talking to the completion model: prompt rendering, backends, and pulling
//! template candidates out of free-form answers.

mod backend;
mod extract;
mod prompt;

pub use backend::{
    query, read_exchange_file, write_exchange_file, BackendConfig, BackendError, BackendExchange,
    BackendKind, CompletionBackend, ExchangeRecord, HttpBackend, HttpConfig, OracleBackend,
    ScriptedBackend, DEFAULT_API_PATH, DEFAULT_TIMEOUT,
};
pub use extract::{extract_candidates, Extractor};
pub use prompt::{build_prompt, Prompt, PromptError, DEFAULT_STATIC_PROMPT};
