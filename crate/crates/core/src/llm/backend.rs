use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use super::prompt::Prompt;
use crate::ingest::GroundTruth;
use crate::template::Template;

pub const DEFAULT_API_PATH: &str = "/api/generate";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("request timed out")]
    Timeout,
    #[error("HTTP status {0}")]
    HttpStatus(u16),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("script exhausted after {0} responses")]
    ScriptExhausted(usize),
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    InvalidScript {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
}

impl BackendError {
    /// Connection-level failure, as opposed to a bad answer.
    pub fn is_transport(&self) -> bool {
        matches!(self, BackendError::Unreachable(_))
    }
}

/// Anything that can answer a prompt. A handle serves one query at a time;
/// use separate handles for concurrent partitions.
pub trait CompletionBackend: Send {
    fn id(&self) -> &str;
    fn complete(&mut self, prompt: &Prompt) -> Result<String, BackendError>;
}

/// One prompt/response round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendExchange {
    pub prompt: Prompt,
    pub response: String,
    pub backend_id: String,
    pub elapsed_ms: u64,
}

impl BackendExchange {
    pub fn record(&self) -> ExchangeRecord {
        ExchangeRecord {
            prompt_hash: self.prompt.hash(),
            response: self.response.clone(),
        }
    }
}

impl Serialize for BackendExchange {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            prompt_hash: String,
            batch: &'a [String],
            response: &'a str,
            backend_id: &'a str,
            elapsed_ms: u64,
        }
        Wire {
            prompt_hash: self.prompt.hash(),
            batch: &self.prompt.batch,
            response: &self.response,
            backend_id: &self.backend_id,
            elapsed_ms: self.elapsed_ms,
        }
        .serialize(serializer)
    }
}

/// Sends `prompt` and times the round trip.
pub fn query(
    backend: &mut dyn CompletionBackend,
    prompt: &Prompt,
) -> Result<BackendExchange, BackendError> {
    let start = Instant::now();
    let response = backend.complete(prompt)?;
    Ok(BackendExchange {
        prompt: prompt.clone(),
        response,
        backend_id: backend.id().to_owned(),
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// One line of a recorded exchange file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeRecord {
    pub prompt_hash: String,
    pub response: String,
}

pub fn read_exchange_file(path: &Path) -> Result<Vec<ExchangeRecord>, BackendError> {
    let io_err = |source| BackendError::Io {
        path: path.to_owned(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| BackendError::InvalidScript {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_exchange_file<'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a ExchangeRecord>,
) -> Result<(), BackendError> {
    let io_err = |source| BackendError::Io {
        path: path.to_owned(),
        source,
    };
    let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
    for rec in records {
        let line = serde_json::to_string(rec).expect("record serializes");
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Scripted,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub timeout: Duration,
}

#[derive(Debug, Clone)]
pub enum BackendConfig {
    Http(HttpConfig),
    Scripted { script_path: PathBuf },
    Oracle { truth: GroundTruth },
}

impl BackendConfig {
    pub fn kind(&self) -> BackendKind {
        match self {
            BackendConfig::Http(_) => BackendKind::Http,
            BackendConfig::Scripted { .. } => BackendKind::Scripted,
            BackendConfig::Oracle { .. } => BackendKind::Oracle,
        }
    }

    /// Opens a fresh handle. Scripted handles each start at the first record.
    pub fn connect(&self) -> Result<Box<dyn CompletionBackend>, BackendError> {
        Ok(match self {
            BackendConfig::Http(cfg) => Box::new(HttpBackend::new(cfg.clone())?),
            BackendConfig::Scripted { script_path } => {
                Box::new(ScriptedBackend::from_file(script_path)?)
            }
            BackendConfig::Oracle { truth } => Box::new(OracleBackend::new(truth)),
        })
    }
}

/// JSON completion endpoint: POST `{"model", "prompt", "stream": false}`,
/// read the `response` field of the reply.
#[derive(Debug)]
pub struct HttpBackend {
    url: String,
    model: String,
    agent: ureq::Agent,
    id: String,
}

impl HttpBackend {
    pub fn new(cfg: HttpConfig) -> Result<HttpBackend, BackendError> {
        let url = resolve_endpoint(&cfg.endpoint_url)?;
        let agent = ureq::AgentBuilder::new().timeout(cfg.timeout).build();
        Ok(HttpBackend {
            id: format!("http:{}", cfg.model_name),
            url,
            model: cfg.model_name,
            agent,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

/// Appends the default API path when the URL has none.
pub fn resolve_endpoint(endpoint: &str) -> Result<String, BackendError> {
    let mut url = url::Url::parse(endpoint)
        .map_err(|e| BackendError::InvalidConfig(format!("endpoint {endpoint:?}: {e}")))?;
    if !matches!(url.scheme(), "http" | "https") {
        return Err(BackendError::InvalidConfig(format!(
            "endpoint {endpoint:?}: unsupported scheme"
        )));
    }
    if url.path().is_empty() || url.path() == "/" {
        url.set_path(DEFAULT_API_PATH);
    }
    Ok(url.into())
}

impl CompletionBackend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&mut self, prompt: &Prompt) -> Result<String, BackendError> {
        let body = serde_json::json!({
            "model": self.model,
            "prompt": prompt.rendered,
            "stream": false,
        });
        let resp = match self.agent.post(&self.url).send_json(body) {
            Ok(resp) => resp,
            Err(ureq::Error::Status(code, _)) => return Err(BackendError::HttpStatus(code)),
            Err(ureq::Error::Transport(t)) => return Err(classify_transport(t)),
        };
        if resp.status() != 200 {
            return Err(BackendError::HttpStatus(resp.status()));
        }
        let text = resp.into_string().map_err(|e| {
            if is_timeout(&e) {
                BackendError::Timeout
            } else {
                BackendError::MalformedResponse(e.to_string())
            }
        })?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| BackendError::MalformedResponse(format!("invalid JSON: {e}")))?;
        value
            .get("response")
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .ok_or_else(|| BackendError::MalformedResponse("missing \"response\" field".into()))
    }
}

fn is_timeout(err: &(dyn std::error::Error + 'static)) -> bool {
    let mut cur: Option<&(dyn std::error::Error + 'static)> = Some(err);
    while let Some(e) = cur {
        if let Some(io) = e.downcast_ref::<std::io::Error>() {
            if matches!(
                io.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) {
                return true;
            }
        }
        cur = e.source();
    }
    false
}

fn classify_transport(t: ureq::Transport) -> BackendError {
    if is_timeout(&t) {
        BackendError::Timeout
    } else {
        BackendError::Unreachable(t.to_string())
    }
}

/// Replays recorded responses in order.
#[derive(Debug)]
pub struct ScriptedBackend {
    records: Vec<ExchangeRecord>,
    next: usize,
    id: String,
}

impl ScriptedBackend {
    pub fn new(records: Vec<ExchangeRecord>) -> ScriptedBackend {
        ScriptedBackend {
            records,
            next: 0,
            id: "scripted".to_owned(),
        }
    }

    pub fn from_file(path: &Path) -> Result<ScriptedBackend, BackendError> {
        let mut b = ScriptedBackend::new(read_exchange_file(path)?);
        b.id = format!("scripted:{}", path.display());
        Ok(b)
    }

    pub fn remaining(&self) -> usize {
        self.records.len() - self.next
    }
}

impl CompletionBackend for ScriptedBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&mut self, prompt: &Prompt) -> Result<String, BackendError> {
        let rec = self
            .records
            .get(self.next)
            .ok_or(BackendError::ScriptExhausted(self.next))?;
        if rec.prompt_hash != prompt.hash() {
            log::warn!(
                "scripted response {} was recorded for a different prompt",
                self.next + 1
            );
        }
        self.next += 1;
        Ok(rec.response.clone())
    }
}

/// Answers with every ground-truth template that matches at least one batch
/// message, in ground-truth order, one `- ` list item per line.
#[derive(Debug, Clone)]
pub struct OracleBackend {
    truth: Vec<Template>,
}

impl OracleBackend {
    pub fn new(truth: &GroundTruth) -> OracleBackend {
        OracleBackend {
            truth: truth.templates().to_vec(),
        }
    }
}

impl CompletionBackend for OracleBackend {
    fn id(&self) -> &str {
        "oracle"
    }

    fn complete(&mut self, prompt: &Prompt) -> Result<String, BackendError> {
        let mut out = String::new();
        for t in &self.truth {
            if prompt.batch.iter().any(|m| t.matches(m)) {
                out.push_str("- ");
                out.push_str(t.as_str());
                out.push('\n');
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_ground_truth;
    use crate::llm::{build_prompt, extract_candidates};

    #[test]
    fn oracle_answers_matching_truth_only() {
        let truth = parse_ground_truth("a <*>\nb <*>\nc <*>\n").unwrap();
        let mut oracle = OracleBackend::new(&truth);
        let p = build_prompt(&["b 1", "b 2", "zzz"], "").unwrap();
        let ex = query(&mut oracle, &p).unwrap();
        assert_eq!(extract_candidates(&ex.response), vec!["b <*>"]);
        assert_eq!(ex.backend_id, "oracle");
    }

    #[test]
    fn oracle_output_survives_extraction_for_literal_templates() {
        let truth = parse_ground_truth("systemd: Started Session.\n").unwrap();
        let mut oracle = OracleBackend::new(&truth);
        let p = build_prompt(&["systemd: Started Session."], "").unwrap();
        let r = oracle.complete(&p).unwrap();
        assert_eq!(extract_candidates(&r), vec!["systemd: Started Session."]);
    }

    #[test]
    fn script_exhaustion() {
        let recs = vec![
            ExchangeRecord {
                prompt_hash: "x".into(),
                response: "one".into(),
            },
            ExchangeRecord {
                prompt_hash: "y".into(),
                response: "two".into(),
            },
        ];
        let mut s = ScriptedBackend::new(recs);
        let p = build_prompt(&["m"], "").unwrap();
        assert_eq!(s.complete(&p).unwrap(), "one");
        assert_eq!(s.complete(&p).unwrap(), "two");
        assert!(matches!(
            s.complete(&p),
            Err(BackendError::ScriptExhausted(2))
        ));
    }

    #[test]
    fn exchange_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        let recs = vec![ExchangeRecord {
            prompt_hash: "h".into(),
            response: "r\nwith newline".into(),
        }];
        write_exchange_file(&path, &recs).unwrap();
        assert_eq!(read_exchange_file(&path).unwrap(), recs);

        fs::write(&path, "{\"prompt_hash\":1}\n").unwrap();
        assert!(matches!(
            read_exchange_file(&path),
            Err(BackendError::InvalidScript { line: 1, .. })
        ));
        assert!(matches!(
            read_exchange_file(&dir.path().join("missing")),
            Err(BackendError::Io { .. })
        ));
    }

    #[test]
    fn endpoint_resolution() {
        assert_eq!(
            resolve_endpoint("http://localhost:11434").unwrap(),
            "http://localhost:11434/api/generate"
        );
        assert_eq!(
            resolve_endpoint("http://h:1/v1/complete").unwrap(),
            "http://h:1/v1/complete"
        );
        assert!(resolve_endpoint("not a url").is_err());
        assert!(resolve_endpoint("ftp://h/").is_err());
    }

    #[test]
    fn config_kinds() {
        let truth = parse_ground_truth("a\n").unwrap();
        let cfg = BackendConfig::Oracle { truth };
        assert_eq!(cfg.kind(), BackendKind::Oracle);
        assert_eq!(cfg.connect().unwrap().id(), "oracle");
        let cfg = BackendConfig::Scripted {
            script_path: "/nonexistent/file".into(),
        };
        assert!(cfg.connect().is_err());
    }
}
