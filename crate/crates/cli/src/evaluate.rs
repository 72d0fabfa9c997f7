//! `eval` and `classify`.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use llmtd_core::eval::{ErrorClass, EvalMode, EvalReport, Evaluator, Status};
use llmtd_core::ingest::{load_ground_truth, load_template_list};
use llmtd_core::Template;

use crate::run::{create_dir, load_messages, write_file, CmdResult};
use crate::{EvalPaths, IngestArgs};

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub paths: EvalPaths,
    /// Detected templates, one per line; `#` lines are ignored.
    #[arg(long, value_name = "PATH")]
    pub detected: PathBuf,
    /// Accept constant specialisations that match the same messages.
    #[arg(long)]
    pub p1: bool,
    /// Accept a bare wildcard in place of a wildcard-bearing word when no
    /// extra messages are matched.
    #[arg(long)]
    pub p2: bool,
    /// Write eval.json here and append a row to eval.csv.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Dataset label for the CSV row; defaults to the log file name.
    #[arg(long, value_name = "NAME")]
    pub dataset: Option<String>,
    #[command(flatten)]
    pub ingest: IngestArgs,
}

fn load_detected(path: &Path) -> anyhow::Result<Vec<Template>> {
    let mut out: Vec<Template> = Vec::new();
    for t in load_template_list(path)? {
        if out.contains(&t) {
            log::warn!("{}: duplicate template {t} ignored", path.display());
        } else {
            out.push(t);
        }
    }
    Ok(out)
}

fn report(args: &EvalArgs) -> anyhow::Result<EvalReport> {
    let gt = load_ground_truth(&args.paths.truth)?;
    let detected = load_detected(&args.detected)?;
    let messages = load_messages(&args.paths.log, &args.ingest)?;
    let mode = EvalMode::new(args.p1, args.p2);
    Ok(Evaluator::new(&gt, &messages).evaluate(&detected, mode))
}

pub fn run_eval(args: &EvalArgs) -> CmdResult {
    let report = report(args)?;
    print!("{}", report.summary());
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        let json = serde_json::to_string_pretty(&report).context("report")? + "\n";
        write_file(&dir.join("eval.json"), json)?;
        let dataset = args.dataset.clone().unwrap_or_else(|| {
            args.paths
                .log
                .file_name()
                .map_or_else(|| "log".to_owned(), |n| n.to_string_lossy().into_owned())
        });
        append_csv(&dir.join("eval.csv"), &report.csv_row(&dataset))?;
    }
    Ok(())
}

fn append_csv(path: &Path, row: &str) -> anyhow::Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if fresh {
        writeln!(f, "{}", EvalReport::CSV_HEADER)?;
    }
    writeln!(f, "{row}").with_context(|| format!("writing {}", path.display()))
}

pub fn run_classify(args: &EvalArgs) -> CmdResult {
    let report = report(args)?;
    for v in &report.verdicts {
        let label = match (v.status, v.error_class) {
            (Status::Incorrect, Some(ErrorClass::Og)) => "OG",
            (Status::Incorrect, Some(ErrorClass::Ug)) => "UG",
            (Status::Incorrect, _) => "MX",
            _ => continue,
        };
        println!("{label}\t{}", v.template);
        if let Some(rel) = &v.relations {
            for g in &rel.more_general_than {
                println!("\tmore general than\t{g}");
            }
            for g in &rel.more_specific_than {
                println!("\tmore specific than\t{g}");
            }
        }
    }
    println!(
        "{} incorrect of {}: OG {}  UG {}  MX {}",
        report.og_count + report.ug_count + report.mx_count,
        report.detected_count,
        report.og_count,
        report.ug_count,
        report.mx_count
    );
    Ok(())
}
