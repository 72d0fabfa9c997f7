use std::collections::HashMap;

use crate::ingest::LogMessage;
use crate::par::Exec;
use crate::template::{strict_subset, Template};

/// Group id of every message under `templates`: the most specific matching
/// template (by language inclusion, then longer literal text, then lower
/// index), or a fresh singleton id for unmatched messages.
pub(crate) fn assign_groups(templates: &[Template], log: &[LogMessage], exec: Exec) -> Vec<usize> {
    let n = templates.len();
    // more_specific[i][j]: templates[i] is strictly more specific than templates[j]
    let more_specific: Vec<Vec<bool>> = exec.map_indexed(n, |i| {
        (0..n)
            .map(|j| i != j && strict_subset(&templates[i], &templates[j]))
            .collect()
    });
    exec.map_slice(log, |m| {
        let hits: Vec<usize> = (0..n).filter(|&i| templates[i].matches(&m.text)).collect();
        hits.iter()
            .copied()
            .filter(|&i| !hits.iter().any(|&j| more_specific[j][i]))
            .min_by_key(|&i| (std::cmp::Reverse(templates[i].literal_len()), i))
            .unwrap_or(usize::MAX)
    })
    .into_iter()
    .enumerate()
    .map(|(pos, g)| if g == usize::MAX { n + pos } else { g })
    .collect()
}

/// Fraction of messages whose detected group is exactly their ground-truth
/// group.
pub fn grouping_accuracy(detected: &[Template], gt: &[Template], log: &[LogMessage]) -> f64 {
    grouping_accuracy_with(detected, gt, log, Exec::default())
}

pub fn grouping_accuracy_with(
    detected: &[Template],
    gt: &[Template],
    log: &[LogMessage],
    exec: Exec,
) -> f64 {
    if log.is_empty() {
        return 0.0;
    }
    let d = assign_groups(detected, log, exec);
    let g = assign_groups(gt, log, exec);
    let mut d_size: HashMap<usize, usize> = HashMap::new();
    let mut g_size: HashMap<usize, usize> = HashMap::new();
    let mut pair_size: HashMap<(usize, usize), usize> = HashMap::new();
    for (&a, &b) in d.iter().zip(&g) {
        *d_size.entry(a).or_default() += 1;
        *g_size.entry(b).or_default() += 1;
        *pair_size.entry((a, b)).or_default() += 1;
    }
    let correct = d
        .iter()
        .zip(&g)
        .filter(|(a, b)| {
            let both = pair_size[&(**a, **b)];
            both == d_size[*a] && both == g_size[*b]
        })
        .count();
    correct as f64 / log.len() as f64
}
