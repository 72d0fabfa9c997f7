//! The two-pass mining loop.
//!
//! First pass: walk the partition in order, skip messages already covered by a
//! known template, collect the rest into batches of `k`, ask the backend for
//! templates, keep the candidates that match something in their batch, and
//! merge them into the template list. A short trailing batch is flushed at the
//! end. Second pass: find messages no template covers (U) and templates that
//! are never the only match for any message (V).

use std::collections::HashSet;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::ingest::{LogMessage, Partition};
use crate::llm::{
    build_prompt, query, BackendConfig, BackendError, BackendExchange, CompletionBackend,
    Extractor, DEFAULT_STATIC_PROMPT,
};
use crate::par::Exec;
use crate::template::Template;

pub const DEFAULT_BATCH_SIZE: usize = 10;

/// Share of the messages seen so far above which a newly merged template is
/// flagged as possibly over-general.
pub const GENERAL_TEMPLATE_WARNING_RATIO: f64 = 0.9;

#[derive(Debug, Error)]
pub enum MineError {
    #[error("batch size must be at least 1")]
    InvalidBatchSize,
    #[error("partition {0:?} has no messages")]
    EmptyPartition(String),
    #[error("backend unreachable while mining {app:?}: {source}")]
    BackendUnreachable {
        app: String,
        stats: Box<MiningStats>,
        #[source]
        source: BackendError,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone)]
pub struct MiningConfig {
    pub batch_size: usize,
    pub static_prompt: String,
    pub extractor: Extractor,
    pub exec: Exec,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            batch_size: DEFAULT_BATCH_SIZE,
            static_prompt: DEFAULT_STATIC_PROMPT.to_owned(),
            extractor: Extractor::default(),
            exec: Exec::default(),
        }
    }
}

impl MiningConfig {
    pub fn with_batch_size(batch_size: usize) -> Result<MiningConfig, MineError> {
        if batch_size == 0 {
            return Err(MineError::InvalidBatchSize);
        }
        Ok(MiningConfig {
            batch_size,
            ..MiningConfig::default()
        })
    }
}

/// Counters gathered during a run. Contains no timings, so it serializes
/// identically across runs with deterministic backends.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MiningStats {
    pub messages: usize,
    pub queries: usize,
    pub failed_queries: usize,
    pub candidates_seen: usize,
    pub candidates_discarded: usize,
    pub candidates_already_known: usize,
    pub templates_dropped_as_specific: usize,
    pub messages_skipped: usize,
    pub warnings: Vec<String>,
    pub backend_errors: Vec<String>,
}

/// Wall-clock figures for one partition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MiningTiming {
    pub elapsed_ms: u64,
    pub query_ms: u64,
}

#[derive(Debug, Clone)]
pub struct MiningResult {
    pub app: String,
    /// Detected templates, each carrying its representative.
    pub templates: Vec<Template>,
    /// Source line indices (`LogMessage::index`) of messages no template covers.
    pub uncovered: Vec<usize>,
    /// Templates that are never the sole match of any message; a subset of
    /// `templates`, in the same order.
    pub duplicates: Vec<Template>,
    pub exchanges: Vec<BackendExchange>,
    pub stats: MiningStats,
    pub timing: MiningTiming,
}

impl MiningResult {
    /// JSON document form. Timings are left out so that reruns with scripted or
    /// oracle backends serialize byte-identically; exchanges (which carry
    /// per-query elapsed times) are included only on request.
    pub fn to_json(&self, include_exchanges: bool) -> serde_json::Value {
        let mut doc = json!({
            "app": self.app,
            "templates": self.templates,
            "representatives": self
                .templates
                .iter()
                .map(|t| t.representative().map(|m| m.text.as_str()))
                .collect::<Vec<_>>(),
            "uncovered": self.uncovered,
            "duplicates": self.duplicates,
            "stats": self.stats,
        });
        if include_exchanges {
            doc["exchanges"] = serde_json::to_value(&self.exchanges).expect("exchanges serialize");
        }
        doc
    }

    pub fn to_json_string(&self, include_exchanges: bool) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json(include_exchanges))
            .expect("result serializes");
        s.push('\n');
        s
    }
}

/// Keeps candidates that parse and match at least one batch message, attaching
/// the first such message as representative. Order follows `candidates`.
pub fn validate_candidates<S: AsRef<str>>(batch: &[LogMessage], candidates: &[S]) -> Vec<Template> {
    candidates
        .iter()
        .filter_map(|c| Template::parse(c.as_ref()).ok())
        .filter_map(|t| {
            let rep = batch.iter().find(|m| t.matches(&m.text))?.clone();
            t.with_representative(rep)
        })
        .collect()
}

/// What [`merge`] did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeOutcome {
    pub appended: Vec<Template>,
    pub already_known: usize,
    pub dropped: Vec<Template>,
}

/// Adds new candidates to `templates`, then drops every template whose
/// representative is matched by another template that does not match its own
/// representative back.
pub fn merge(templates: &mut Vec<Template>, candidates: Vec<Template>) -> MergeOutcome {
    let mut outcome = MergeOutcome::default();
    let mut known: HashSet<String> = templates.iter().map(|t| t.as_str().to_owned()).collect();
    for c in candidates {
        if known.insert(c.as_str().to_owned()) {
            outcome.appended.push(c.clone());
            templates.push(c);
        } else {
            outcome.already_known += 1;
        }
    }

    let covers = |general: &Template, specific: &Template| {
        specific
            .representative()
            .is_some_and(|rep| general.matches(&rep.text))
    };
    let n = templates.len();
    let marked: Vec<bool> = (0..n)
        .map(|i| {
            (0..n).any(|j| {
                j != i
                    && covers(&templates[j], &templates[i])
                    && !covers(&templates[i], &templates[j])
            })
        })
        .collect();
    let mut keep = marked.iter().map(|m| !m);
    let (kept, dropped): (Vec<Template>, Vec<Template>) =
        templates.drain(..).partition(|_| keep.next().unwrap());
    *templates = kept;
    outcome
        .appended
        .retain(|t| templates.iter().any(|k| k == t));
    outcome.dropped = dropped;
    outcome
}

/// Uncovered message positions and duplicate templates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SecondPass {
    /// Positions into the message slice.
    pub uncovered: Vec<usize>,
    /// Positions into the template slice.
    pub duplicates: Vec<usize>,
}

pub fn second_pass(templates: &[Template], messages: &[LogMessage]) -> SecondPass {
    second_pass_with(templates, messages, Exec::default())
}

pub fn second_pass_with(templates: &[Template], messages: &[LogMessage], exec: Exec) -> SecondPass {
    // Per message: None if uncovered, Some(Some(t)) if t is the sole match.
    let verdicts: Vec<Option<Option<usize>>> = exec.map_slice(messages, |m| {
        let mut hits = templates
            .iter()
            .enumerate()
            .filter(|(_, t)| t.matches(&m.text))
            .map(|(i, _)| i);
        let first = hits.next()?;
        Some(if hits.next().is_none() {
            Some(first)
        } else {
            None
        })
    });
    let mut sole = vec![false; templates.len()];
    let mut uncovered = Vec::new();
    for (pos, v) in verdicts.into_iter().enumerate() {
        match v {
            None => uncovered.push(pos),
            Some(Some(t)) => sole[t] = true,
            Some(None) => {}
        }
    }
    SecondPass {
        uncovered,
        duplicates: (0..templates.len()).filter(|&i| !sole[i]).collect(),
    }
}

struct Miner<'a> {
    cfg: &'a MiningConfig,
    backend: &'a mut dyn CompletionBackend,
    app: &'a str,
    templates: Vec<Template>,
    exchanges: Vec<BackendExchange>,
    stats: MiningStats,
    query_ms: u64,
}

impl Miner<'_> {
    fn process_batch(
        &mut self,
        batch: &[LogMessage],
        seen: &[LogMessage],
    ) -> Result<(), MineError> {
        let texts: Vec<&str> = batch.iter().map(|m| m.text.as_str()).collect();
        let prompt = build_prompt(&texts, &self.cfg.static_prompt)
            .expect("batch is non-empty and messages are single lines");
        self.stats.queries += 1;
        let exchange = match query(self.backend, &prompt) {
            Ok(ex) => ex,
            Err(e) => {
                if e.is_transport() && self.stats.queries == 1 {
                    return Err(MineError::BackendUnreachable {
                        app: self.app.to_owned(),
                        stats: Box::new(self.stats.clone()),
                        source: e,
                    });
                }
                log::warn!("{}: query {} failed: {e}", self.app, self.stats.queries);
                self.stats.failed_queries += 1;
                self.stats
                    .backend_errors
                    .push(format!("query {}: {e}", self.stats.queries));
                return Ok(());
            }
        };
        self.query_ms += exchange.elapsed_ms;

        let candidates = self.cfg.extractor.extract(&exchange.response);
        let valid = validate_candidates(batch, &candidates);
        self.stats.candidates_seen += candidates.len();
        self.stats.candidates_discarded += candidates.len() - valid.len();

        let outcome = merge(&mut self.templates, valid);
        self.stats.candidates_already_known += outcome.already_known;
        self.stats.templates_dropped_as_specific += outcome.dropped.len();
        for t in &outcome.appended {
            let hits = seen.iter().filter(|m| t.matches(&m.text)).count();
            if hits as f64 > GENERAL_TEMPLATE_WARNING_RATIO * seen.len() as f64 {
                let w = format!(
                    "template {:?} matches {hits} of {} messages seen so far; it may be over-general",
                    t.as_str(),
                    seen.len()
                );
                log::warn!("{}: {w}", self.app);
                self.stats.warnings.push(w);
            }
        }
        self.exchanges.push(exchange);
        Ok(())
    }
}

/// Mines one partition with an already-open backend handle.
pub fn mine(
    partition: &Partition,
    cfg: &MiningConfig,
    backend: &mut dyn CompletionBackend,
) -> Result<MiningResult, MineError> {
    if cfg.batch_size == 0 {
        return Err(MineError::InvalidBatchSize);
    }
    let messages = &partition.messages;
    if messages.is_empty() {
        return Err(MineError::EmptyPartition(partition.app.clone()));
    }
    let start = Instant::now();
    let mut miner = Miner {
        cfg,
        backend,
        app: &partition.app,
        templates: Vec::new(),
        exchanges: Vec::new(),
        stats: MiningStats {
            messages: messages.len(),
            ..MiningStats::default()
        },
        query_ms: 0,
    };

    let mut batch: Vec<LogMessage> = Vec::with_capacity(cfg.batch_size);
    for (pos, msg) in messages.iter().enumerate() {
        if miner.templates.iter().any(|t| t.matches(&msg.text)) {
            miner.stats.messages_skipped += 1;
            continue;
        }
        batch.push(msg.clone());
        if batch.len() < cfg.batch_size {
            continue;
        }
        miner.process_batch(&batch, &messages[..=pos])?;
        batch.clear();
    }
    if !batch.is_empty() {
        miner.process_batch(&batch, messages)?;
    }

    let pass = second_pass_with(&miner.templates, messages, cfg.exec);
    let Miner {
        templates,
        exchanges,
        stats,
        query_ms,
        ..
    } = miner;
    Ok(MiningResult {
        app: partition.app.clone(),
        uncovered: pass.uncovered.iter().map(|&p| messages[p].index).collect(),
        duplicates: pass
            .duplicates
            .iter()
            .map(|&i| templates[i].clone())
            .collect(),
        templates,
        exchanges,
        stats,
        timing: MiningTiming {
            elapsed_ms: start.elapsed().as_millis() as u64,
            query_ms,
        },
    })
}

/// Opens a handle from `backend` and mines one partition with it.
pub fn mine_with(
    partition: &Partition,
    cfg: &MiningConfig,
    backend: &BackendConfig,
) -> Result<MiningResult, MineError> {
    let mut handle = backend.connect()?;
    mine(partition, cfg, handle.as_mut())
}
