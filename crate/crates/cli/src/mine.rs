//! `mine` and `replay`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::builder::RangedU64ValueParser;
use clap::Args;
use llmtd_core::ingest::{load_ground_truth, partition_by_app};
use llmtd_core::llm::{
    BackendConfig, CompletionBackend, ExchangeRecord, HttpConfig, OracleBackend, ScriptedBackend,
    DEFAULT_STATIC_PROMPT, DEFAULT_TIMEOUT,
};
use llmtd_core::mining::{mine, MineError, MiningConfig, MiningResult, DEFAULT_BATCH_SIZE};
use llmtd_core::{Exec, Partition};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::diff::json_diff;
use crate::run::{
    absolute, create_dir, file_stem, load_messages, sha256_file, write_file, CmdResult, Failure,
    FailureKind,
};
use crate::{BackendChoice, IngestArgs};

#[derive(Args, Debug)]
pub struct MineArgs {
    /// Event log to mine.
    #[arg(long, value_name = "PATH")]
    pub log: PathBuf,
    #[arg(long, value_enum, default_value = "http")]
    pub backend: BackendChoice,
    /// Completion endpoint for the http backend.
    #[arg(long, env = "LLMTD_ENDPOINT", value_name = "URL")]
    pub endpoint: Option<String>,
    /// Model name sent to the http backend.
    #[arg(long, value_name = "NAME")]
    pub model: Option<String>,
    /// Request timeout for the http backend.
    #[arg(long, value_name = "SECS", default_value_t = DEFAULT_TIMEOUT.as_secs())]
    pub timeout_secs: u64,
    /// Ground-truth templates answered by the oracle backend.
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    /// Recorded exchanges answered by the scripted backend.
    #[arg(long, value_name = "PATH")]
    pub replay: Option<PathBuf>,
    /// Write every exchange to this line-delimited JSON file and include the
    /// exchanges in the per-partition results.
    #[arg(long, value_name = "PATH")]
    pub record: Option<PathBuf>,
    /// Static part of the prompt (instructions and worked example).
    #[arg(long, value_name = "PATH")]
    pub prompt_file: Option<PathBuf>,
    /// Messages per query.
    #[arg(short = 'k', long, default_value_t = DEFAULT_BATCH_SIZE,
          value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    pub batch_size: usize,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Partitions mined concurrently; 1 keeps everything sequential.
    #[arg(long, value_name = "N", default_value_t = 1,
          value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    pub jobs: usize,
    #[command(flatten)]
    pub ingest: IngestArgs,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// Output directory of an earlier `mine` run.
    #[arg(long, value_name = "DIR")]
    pub snapshot: PathBuf,
    /// Recorded exchanges; defaults to the recording named in the snapshot's
    /// manifest.
    #[arg(long, value_name = "PATH")]
    pub replay: Option<PathBuf>,
    /// Event log; defaults to the log named in the manifest.
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,
}

/// One line of a recording: the exchange plus the partition it belongs to.
#[derive(Debug, Serialize, Deserialize)]
struct RecordLine {
    app: String,
    prompt_hash: String,
    response: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InputFile {
    path: PathBuf,
    sha256: String,
}

impl InputFile {
    fn of(path: &Path) -> anyhow::Result<InputFile> {
        Ok(InputFile {
            path: absolute(path),
            sha256: sha256_file(path)?,
        })
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    tool_version: String,
    log: InputFile,
    no_header: bool,
    strip_prefix: Option<String>,
    batch_size: usize,
    backend: String,
    endpoint: Option<String>,
    model: Option<String>,
    timeout_secs: u64,
    truth: Option<InputFile>,
    replay: Option<InputFile>,
    record: Option<PathBuf>,
    prompt_file: Option<InputFile>,
    prompt_sha256: String,
    jobs: usize,
    partitions: Vec<String>,
}

/// Per-partition backend factory.
enum Backends {
    Http(HttpConfig),
    Oracle(OracleBackend),
    Scripted(Vec<RecordLine>),
}

impl Backends {
    fn handle(&self, app: &str) -> Result<Box<dyn CompletionBackend>, MineError> {
        Ok(match self {
            Backends::Http(cfg) => BackendConfig::Http(cfg.clone()).connect()?,
            Backends::Oracle(oracle) => Box::new(oracle.clone()),
            Backends::Scripted(lines) => Box::new(ScriptedBackend::new(
                lines
                    .iter()
                    .filter(|l| l.app == app)
                    .map(|l| ExchangeRecord {
                        prompt_hash: l.prompt_hash.clone(),
                        response: l.response.clone(),
                    })
                    .collect(),
            )),
        })
    }
}

fn read_recording(path: &Path) -> anyhow::Result<Vec<RecordLine>> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: bad exchange record", path.display(), i + 1))?;
        out.push(rec);
    }
    Ok(out)
}

fn static_prompt(path: Option<&Path>) -> anyhow::Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(DEFAULT_STATIC_PROMPT.to_owned()),
    }
}

fn backends(args: &MineArgs) -> anyhow::Result<Backends> {
    Ok(match args.backend {
        BackendChoice::Http => {
            let endpoint = args
                .endpoint
                .clone()
                .ok_or_else(|| anyhow!("--backend http needs --endpoint or LLMTD_ENDPOINT"))?;
            let model = args
                .model
                .clone()
                .ok_or_else(|| anyhow!("--backend http needs --model"))?;
            Backends::Http(HttpConfig {
                endpoint_url: endpoint,
                model_name: model,
                timeout: Duration::from_secs(args.timeout_secs),
            })
        }
        BackendChoice::Oracle => {
            let path = args
                .truth
                .as_deref()
                .ok_or_else(|| anyhow!("--backend oracle needs --truth"))?;
            Backends::Oracle(OracleBackend::new(&load_ground_truth(path)?))
        }
        BackendChoice::Scripted => {
            let path = args
                .replay
                .as_deref()
                .ok_or_else(|| anyhow!("--backend scripted needs --replay"))?;
            Backends::Scripted(read_recording(path)?)
        }
    })
}

type PartitionOutcome = Result<MiningResult, MineError>;

/// Mines every partition, concurrently when `jobs > 1`. Results come back in
/// partition order either way.
fn mine_all(
    parts: &[Partition],
    cfg: &MiningConfig,
    backends: &Backends,
    jobs: usize,
) -> anyhow::Result<Vec<PartitionOutcome>> {
    let one = |p: &Partition| -> PartitionOutcome {
        let mut handle = backends.handle(&p.app)?;
        log::info!("mining {} ({} messages)", p.app, p.messages.len());
        mine(p, cfg, handle.as_mut())
    };
    if jobs <= 1 {
        return Ok(parts.iter().map(one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting worker pool")?;
    Ok(pool.install(|| parts.par_iter().map(one).collect()))
}

fn mining_config(batch_size: usize, static_prompt: String, jobs: usize) -> MiningConfig {
    MiningConfig {
        batch_size,
        static_prompt,
        exec: if jobs > 1 {
            Exec::Parallel
        } else {
            Exec::Sequential
        },
        ..MiningConfig::default()
    }
}

pub fn run_mine(args: &MineArgs) -> CmdResult {
    let messages = load_messages(&args.log, &args.ingest)?;
    let parts = partition_by_app(&messages);
    let prompt = static_prompt(args.prompt_file.as_deref())?;
    let backends = backends(args)?;
    let cfg = mining_config(args.batch_size, prompt.clone(), args.jobs);

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        log: InputFile::of(&args.log)?,
        no_header: args.ingest.no_header,
        strip_prefix: args.ingest.strip_prefix.clone(),
        batch_size: args.batch_size,
        backend: format!("{:?}", args.backend).to_lowercase(),
        endpoint: args
            .endpoint
            .clone()
            .filter(|_| args.backend == BackendChoice::Http),
        model: args.model.clone(),
        timeout_secs: args.timeout_secs,
        truth: args.truth.as_deref().map(InputFile::of).transpose()?,
        replay: args.replay.as_deref().map(InputFile::of).transpose()?,
        record: args.record.as_deref().map(absolute),
        prompt_file: args.prompt_file.as_deref().map(InputFile::of).transpose()?,
        prompt_sha256: hex::encode(Sha256::digest(prompt.as_bytes())),
        jobs: args.jobs,
        partitions: parts.iter().map(|p| p.app.clone()).collect(),
    };
    create_dir(&args.out.join("partitions"))?;
    write_file(
        &args.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).context("manifest")? + "\n",
    )?;

    let outcomes = mine_all(&parts, &cfg, &backends, args.jobs)?;
    write_outputs(&args.out, &parts, &outcomes, args.record.is_some())?;
    if let Some(path) = &args.record {
        write_recording(path, &outcomes)?;
    }

    let failed: Vec<String> = parts
        .iter()
        .zip(&outcomes)
        .filter_map(|(p, o)| o.as_ref().err().map(|e| format!("{}: {e}", p.app)))
        .collect();
    let done = outcomes.iter().filter(|o| o.is_ok()).count();
    let templates: usize = outcomes.iter().flatten().map(|r| r.templates.len()).sum();
    let queries: usize = outcomes.iter().flatten().map(|r| r.stats.queries).sum();
    println!(
        "{done} of {} partitions mined, {templates} templates, {queries} queries; output in {}",
        parts.len(),
        args.out.display()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(
            FailureKind::Backend,
            anyhow!(
                "backend failure (partial output written):\n  {}",
                failed.join("\n  ")
            ),
        ))
    }
}

fn write_outputs(
    out: &Path,
    parts: &[Partition],
    outcomes: &[PartitionOutcome],
    include_exchanges: bool,
) -> anyhow::Result<()> {
    let mut templates = String::new();
    let mut uncovered = String::new();
    let mut duplicates = String::new();
    let mut stats = Vec::new();
    for (part, outcome) in parts.iter().zip(outcomes) {
        let r = match outcome {
            Ok(r) => r,
            Err(e) => {
                let partial = match e {
                    MineError::BackendUnreachable { stats, .. } => json!(stats),
                    _ => serde_json::Value::Null,
                };
                stats.push(json!({"app": part.app, "error": e.to_string(), "stats": partial}));
                continue;
            }
        };
        write_file(
            &out.join("partitions")
                .join(format!("{}.json", file_stem(&part.app))),
            r.to_json_string(include_exchanges),
        )?;
        let _ = writeln!(templates, "# {}", part.app);
        for t in &r.templates {
            let _ = writeln!(templates, "{t}");
        }
        if !r.uncovered.is_empty() {
            let _ = writeln!(uncovered, "# {}", part.app);
            for m in part
                .messages
                .iter()
                .filter(|m| r.uncovered.contains(&m.index))
            {
                let _ = writeln!(uncovered, "{}\t{}", m.index, m.raw);
            }
        }
        if !r.duplicates.is_empty() {
            let _ = writeln!(duplicates, "# {}", part.app);
            for t in &r.duplicates {
                let _ = writeln!(duplicates, "{t}");
            }
        }
        stats.push(json!({
            "app": r.app,
            "messages": r.stats.messages,
            "queries": r.stats.queries,
            "templates": r.templates.len(),
            "uncovered": r.uncovered.len(),
            "duplicates": r.duplicates.len(),
            "elapsed_ms": r.timing.elapsed_ms,
            "query_ms": r.timing.query_ms,
            "stats": r.stats,
        }));
    }
    write_file(&out.join("templates.txt"), templates)?;
    write_file(&out.join("uncovered.txt"), uncovered)?;
    write_file(&out.join("duplicates.txt"), duplicates)?;
    write_file(
        &out.join("stats.json"),
        serde_json::to_string_pretty(&json!({ "partitions": stats })).context("stats")? + "\n",
    )
}

fn write_recording(path: &Path, outcomes: &[PartitionOutcome]) -> anyhow::Result<()> {
    let mut out = std::io::BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    for r in outcomes.iter().flatten() {
        for ex in &r.exchanges {
            let line = RecordLine {
                app: r.app.clone(),
                prompt_hash: ex.prompt.hash(),
                response: ex.response.clone(),
            };
            writeln!(out, "{}", serde_json::to_string(&line).context("record")?)
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    out.flush()
        .with_context(|| format!("writing {}", path.display()))
}

fn load_manifest(dir: &Path) -> anyhow::Result<Manifest> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn stored_result(dir: &Path, app: &str) -> anyhow::Result<serde_json::Value> {
    let path = dir
        .join("partitions")
        .join(format!("{}.json", file_stem(app)));
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut v: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("exchanges");
    }
    Ok(v)
}

pub fn run_replay(args: &ReplayArgs) -> CmdResult {
    let manifest = load_manifest(&args.snapshot)?;
    let log_path = args
        .log
        .clone()
        .unwrap_or_else(|| manifest.log.path.clone());
    let script = args
        .replay
        .clone()
        .or_else(|| manifest.record.clone())
        .or_else(|| manifest.replay.as_ref().map(|f| f.path.clone()))
        .ok_or_else(|| anyhow!("the snapshot names no recording; pass --replay"))?;
    let lines = read_recording(&script)?;

    let ingest = IngestArgs {
        no_header: manifest.no_header,
        strip_prefix: manifest.strip_prefix.clone(),
    };
    let messages = load_messages(&log_path, &ingest)?;
    if sha256_file(&log_path)? != manifest.log.sha256 {
        log::warn!(
            "{} differs from the log recorded in the manifest",
            log_path.display()
        );
    }
    let prompt = static_prompt(manifest.prompt_file.as_ref().map(|f| f.path.as_path()))?;
    if hex::encode(Sha256::digest(prompt.as_bytes())) != manifest.prompt_sha256 {
        return Err(anyhow!("static prompt no longer matches the manifest").into());
    }
    let parts = partition_by_app(&messages);
    let cfg = mining_config(manifest.batch_size, prompt, 1);
    let outcomes = mine_all(&parts, &cfg, &Backends::Scripted(lines), 1)?;

    let mut report = Vec::new();
    let apps: Vec<&str> = parts.iter().map(|p| p.app.as_str()).collect();
    if apps != manifest.partitions {
        report.push(format!(
            "partitions: expected {:?}, got {apps:?}",
            manifest.partitions
        ));
    }
    for (part, outcome) in parts.iter().zip(&outcomes) {
        let r = match outcome {
            Ok(r) => r,
            Err(e) => {
                report.push(format!("{}: {e}", part.app));
                continue;
            }
        };
        let stored = match stored_result(&args.snapshot, &part.app) {
            Ok(v) => v,
            Err(e) => {
                report.push(format!("{}: {e:#}", part.app));
                continue;
            }
        };
        for line in json_diff(&stored, &r.to_json(false)) {
            report.push(format!("{}: {line}", part.app));
        }
    }
    if report.is_empty() {
        println!("replay matches snapshot ({} partitions)", parts.len());
        Ok(())
    } else {
        Err(Failure::new(
            FailureKind::Mismatch,
            anyhow!("snapshot mismatch:\n  {}", report.join("\n  ")),
        ))
    }
}
