use serde::Serialize;

use crate::ingest::LogMessage;
use crate::template::{
    is_constant_specialization, is_word_atomic_generalization, strict_subset, MatchSet, Template,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    Correct,
    Incorrect,
    CorrectViaP1,
    CorrectViaP2,
}

impl Status {
    pub fn is_correct(self) -> bool {
        self != Status::Incorrect
    }
}

/// Why an incorrect template is wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ErrorClass {
    /// Strictly more general than some ground-truth template.
    Og,
    /// Strictly more specific than some ground-truth template.
    Ug,
    /// Neither.
    Mx,
}

/// Ground-truth templates an incorrect template is strictly comparable with.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ErrorRelations {
    pub more_general_than: Vec<Template>,
    pub more_specific_than: Vec<Template>,
}

impl ErrorRelations {
    pub fn of(t: &Template, gt: &[Template]) -> ErrorRelations {
        ErrorRelations {
            more_general_than: gt.iter().filter(|v| strict_subset(v, t)).cloned().collect(),
            more_specific_than: gt.iter().filter(|v| strict_subset(t, v)).cloned().collect(),
        }
    }

    /// OG takes precedence over UG when both hold against different templates.
    pub fn class(&self) -> ErrorClass {
        if !self.more_general_than.is_empty() {
            ErrorClass::Og
        } else if !self.more_specific_than.is_empty() {
            ErrorClass::Ug
        } else {
            ErrorClass::Mx
        }
    }
}

pub fn classify_incorrect(t: &Template, gt: &[Template]) -> ErrorClass {
    if gt.iter().any(|v| strict_subset(v, t)) {
        ErrorClass::Og
    } else if gt.iter().any(|v| strict_subset(t, v)) {
        ErrorClass::Ug
    } else {
        ErrorClass::Mx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateVerdict {
    pub template: Template,
    pub status: Status,
    pub matched_gt: Option<Template>,
    pub error_class: Option<ErrorClass>,
    /// Set for incorrect templates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relations: Option<ErrorRelations>,
    /// Messages the template matches in the evaluation log.
    pub matched_messages: usize,
}

pub(crate) fn p1_holds(t: &Template, v: &Template, t_ms: &MatchSet, v_ms: &MatchSet) -> bool {
    is_constant_specialization(t, v) && t_ms == v_ms
}

pub(crate) fn p2_holds(t: &Template, v: &Template, t_ms: &MatchSet, v_ms: &MatchSet) -> bool {
    is_word_atomic_generalization(t, v) && t_ms == v_ms
}

/// `t` replaces some wildcards of `v` with constants and matches exactly the
/// same messages of `log`.
pub fn p1_correct(t: &Template, v: &Template, log: &[LogMessage]) -> bool {
    p1_holds(t, v, &t.match_set(log), &v.match_set(log))
}

/// `t` replaces some wildcard-bearing words of `v` by a bare wildcard and
/// matches exactly the same messages of `log`.
pub fn p2_correct(t: &Template, v: &Template, log: &[LogMessage]) -> bool {
    p2_holds(t, v, &t.match_set(log), &v.match_set(log))
}
