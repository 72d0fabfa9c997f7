use serde::Serialize;

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision over detected templates, recall over distinct covered
/// ground-truth templates, and their harmonic mean.
pub fn compute_scores(
    correct: usize,
    detected: usize,
    gt_covered: usize,
    gt_total: usize,
) -> Result<Scores, EvalError> {
    if correct > detected || gt_covered > gt_total || gt_total == 0 || gt_covered > correct {
        return Err(EvalError::InvalidCounts {
            correct,
            detected,
            gt_covered,
            gt_total,
        });
    }
    let precision = if detected == 0 {
        0.0
    } else {
        correct as f64 / detected as f64
    };
    let recall = gt_covered as f64 / gt_total as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Scores {
        precision,
        recall,
        f1,
    })
}
