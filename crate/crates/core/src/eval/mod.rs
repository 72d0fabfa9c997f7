//! Judging detected templates against ground truth.
//!
//! A detected template is correct when every message it matches belongs to a
//! single ground-truth template `v` and the two are identical, optionally
//! relaxed by P1 (a constant in place of a wildcard of `v` that is constant in
//! the data) and P2 (a bare wildcard in place of a wildcard-bearing word of `v`
//! when no extra messages are matched).

mod grouping;
mod scores;
mod verdict;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{GroundTruth, LogMessage};
use crate::par::Exec;
use crate::template::{MatchSet, Template};

pub use grouping::{grouping_accuracy, grouping_accuracy_with};
pub use scores::{compute_scores, Scores};
pub use verdict::{
    classify_incorrect, p1_correct, p2_correct, ErrorClass, ErrorRelations, Status, TemplateVerdict,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error(
        "invalid counts: correct={correct} detected={detected} gt_covered={gt_covered} gt_total={gt_total}"
    )]
    InvalidCounts {
        correct: usize,
        detected: usize,
        gt_covered: usize,
        gt_total: usize,
    },
}

/// Which relaxations apply. P2 is independent of P1 and is never switched on
/// implicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct EvalMode {
    pub strict_only: bool,
    pub apply_p1: bool,
    pub apply_p2: bool,
}

impl EvalMode {
    pub const STRICT: EvalMode = EvalMode::new(false, false);
    pub const P1: EvalMode = EvalMode::new(true, false);
    pub const P1_P2: EvalMode = EvalMode::new(true, true);

    pub const fn new(apply_p1: bool, apply_p2: bool) -> EvalMode {
        EvalMode {
            strict_only: !apply_p1 && !apply_p2,
            apply_p1,
            apply_p2,
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.apply_p1, self.apply_p2) {
            (false, false) => "strict",
            (true, false) => "p1",
            (false, true) => "p2",
            (true, true) => "p1+p2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mode: String,
    pub verdicts: Vec<TemplateVerdict>,
    pub correct_count: usize,
    pub detected_count: usize,
    pub gt_count: usize,
    pub gt_covered: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub grouping_accuracy: f64,
    pub og_count: usize,
    pub ug_count: usize,
    pub mx_count: usize,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "dataset,mode,correct,detected,gt,precision,recall,f1,ga,og,ug,mx";

    pub fn csv_row(&self, dataset: &str) -> String {
        let dataset = if dataset.contains([',', '"', '\n']) {
            format!("\"{}\"", dataset.replace('"', "\"\""))
        } else {
            dataset.to_owned()
        };
        format!(
            "{dataset},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{},{},{}",
            self.mode,
            self.correct_count,
            self.detected_count,
            self.gt_count,
            self.precision,
            self.recall,
            self.f1,
            self.grouping_accuracy,
            self.og_count,
            self.ug_count,
            self.mx_count
        )
    }

    /// Short human-readable table.
    pub fn summary(&self) -> String {
        format!(
            "mode        {}\ncorrect     {} of {} detected ({} ground-truth templates, {} covered)\n\
             precision   {:.4}\nrecall      {:.4}\nf1          {:.4}\ngrouping    {:.4}\n\
             incorrect   OG {}  UG {}  MX {}\n",
            self.mode,
            self.correct_count,
            self.detected_count,
            self.gt_count,
            self.gt_covered,
            self.precision,
            self.recall,
            self.f1,
            self.grouping_accuracy,
            self.og_count,
            self.ug_count,
            self.mx_count
        )
    }
}

/// Ground truth paired with a log, with the ground-truth match sets computed
/// once and shared by every assessment.
#[derive(Debug)]
pub struct Evaluator<'a> {
    gt: &'a [Template],
    log: &'a [LogMessage],
    gt_sets: Vec<MatchSet>,
    exec: Exec,
}

impl<'a> Evaluator<'a> {
    pub fn new(gt: &'a GroundTruth, log: &'a [LogMessage]) -> Evaluator<'a> {
        Evaluator::with_exec(gt, log, Exec::default())
    }

    pub fn with_exec(gt: &'a GroundTruth, log: &'a [LogMessage], exec: Exec) -> Evaluator<'a> {
        Evaluator::from_templates(gt.templates(), log, exec)
    }

    fn from_templates(gt: &'a [Template], log: &'a [LogMessage], exec: Exec) -> Evaluator<'a> {
        let gt_sets = exec.map_slice(gt, |v| v.match_set_with(log, Exec::Sequential));
        Evaluator {
            gt,
            log,
            gt_sets,
            exec,
        }
    }

    /// The single ground-truth template whose messages cover `ms`, if any.
    fn covering_gt(&self, ms: &MatchSet) -> Option<usize> {
        let touching: Vec<usize> = (0..self.gt.len())
            .filter(|&i| ms.intersects(&self.gt_sets[i]))
            .collect();
        match touching.as_slice() {
            [] => None,
            [only] => Some(*only),
            // overlapping ground truth: fall back to containment
            _ => {
                let mut containing = touching
                    .into_iter()
                    .filter(|&i| ms.is_subset(&self.gt_sets[i]));
                let first = containing.next()?;
                containing.next().is_none().then_some(first)
            }
        }
    }

    pub fn assess(&self, t: &Template, mode: EvalMode) -> TemplateVerdict {
        let ms = t.match_set_with(self.log, Exec::Sequential);
        let matched_messages = ms.len();
        let correct = |status, v: &Template| TemplateVerdict {
            template: t.clone(),
            status,
            matched_gt: Some(v.clone()),
            error_class: None,
            relations: None,
            matched_messages,
        };

        if let Some(v) = self.gt.iter().find(|v| *v == t) {
            return correct(Status::Correct, v);
        }
        if let Some(i) = self.covering_gt(&ms) {
            let (v, v_ms) = (&self.gt[i], &self.gt_sets[i]);
            if mode.apply_p1 && verdict::p1_holds(t, v, &ms, v_ms) {
                return correct(Status::CorrectViaP1, v);
            }
            if mode.apply_p2 && verdict::p2_holds(t, v, &ms, v_ms) {
                return correct(Status::CorrectViaP2, v);
            }
        }
        let relations = ErrorRelations::of(t, self.gt);
        TemplateVerdict {
            template: t.clone(),
            status: Status::Incorrect,
            matched_gt: None,
            error_class: Some(relations.class()),
            relations: Some(relations),
            matched_messages,
        }
    }

    pub fn evaluate(&self, detected: &[Template], mode: EvalMode) -> EvalReport {
        let verdicts = self.exec.map_slice(detected, |t| self.assess(t, mode));
        let correct_count = verdicts.iter().filter(|v| v.status.is_correct()).count();
        let mut covered: Vec<&str> = verdicts
            .iter()
            .filter_map(|v| v.matched_gt.as_ref().map(Template::as_str))
            .collect();
        covered.sort_unstable();
        covered.dedup();
        let class_count = |c| verdicts.iter().filter(|v| v.error_class == Some(c)).count();
        let scores = compute_scores(correct_count, detected.len(), covered.len(), self.gt.len())
            .expect("counts derived from verdicts are consistent");
        EvalReport {
            mode: mode.to_string(),
            correct_count,
            detected_count: detected.len(),
            gt_count: self.gt.len(),
            gt_covered: covered.len(),
            precision: scores.precision,
            recall: scores.recall,
            f1: scores.f1,
            grouping_accuracy: grouping_accuracy_with(detected, self.gt, self.log, self.exec),
            og_count: class_count(ErrorClass::Og),
            ug_count: class_count(ErrorClass::Ug),
            mx_count: class_count(ErrorClass::Mx),
            verdicts,
        }
    }
}

pub fn assess_template(
    t: &Template,
    gt: &GroundTruth,
    log: &[LogMessage],
    mode: EvalMode,
) -> TemplateVerdict {
    Evaluator::new(gt, log).assess(t, mode)
}

pub fn evaluate(
    detected: &[Template],
    gt: &GroundTruth,
    log: &[LogMessage],
    mode: EvalMode,
) -> EvalReport {
    Evaluator::new(gt, log).evaluate(detected, mode)
}
