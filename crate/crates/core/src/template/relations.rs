//! Structural relations between a detected template and a reference template.

use super::matcher::match_tokens;
use super::{Template, Token, WILDCARD};

/// True iff `t` is `v` with zero or more of `v`'s wildcards replaced by
/// non-empty constant strings.
///
/// Every wildcard of `t` must then be a kept wildcard of `v`, in order, and
/// each literal stretch of `t` must be matched by the slice of `v` lying
/// between the corresponding kept wildcards (replaced wildcards inside that
/// slice absorb the constants).
pub fn is_constant_specialization(t: &Template, v: &Template) -> bool {
    if t == v {
        return true;
    }
    let t_wild: Vec<usize> = wildcard_positions(t.tokens());
    let v_wild: Vec<usize> = wildcard_positions(v.tokens());
    if t_wild.len() > v_wild.len() {
        return false;
    }

    // Literal text of t between consecutive wildcards (empty at an open end).
    let t_segments: Vec<&str> = {
        let mut segs = Vec::with_capacity(t_wild.len() + 1);
        let mut start = 0;
        for &w in t_wild.iter().chain(std::iter::once(&t.tokens().len())) {
            let seg = match &t.tokens()[start..w] {
                [] => "",
                [Token::Literal(s)] => s.as_str(),
                _ => unreachable!("normal form has one literal between wildcards"),
            };
            segs.push(seg);
            start = w + 1;
        }
        segs
    };

    let v_tokens = v.tokens();
    let p = t_wild.len();
    if p == 0 {
        return match_tokens(v_tokens, t_segments[0]);
    }

    // reach[j]: t's first i wildcards can be mapped with the i-th landing on
    // v wildcard j, and everything before it is consistent.
    let mut reach: Vec<bool> = v_wild
        .iter()
        .map(|&vw| match_tokens(&v_tokens[..vw], t_segments[0]))
        .collect();
    for seg in &t_segments[1..p] {
        let mut next = vec![false; v_wild.len()];
        for (j, &vw) in v_wild.iter().enumerate() {
            next[j] = (0..j).any(|i| reach[i] && match_tokens(&v_tokens[v_wild[i] + 1..vw], seg));
        }
        reach = next;
    }
    let tail = t_segments[p];
    v_wild
        .iter()
        .enumerate()
        .any(|(j, &vw)| reach[j] && match_tokens(&v_tokens[vw + 1..], tail))
}

fn wildcard_positions(tokens: &[Token]) -> Vec<usize> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, tok)| tok.is_wildcard())
        .map(|(i, _)| i)
        .collect()
}

/// True iff `t` equals `v` after replacing some of `v`'s whitespace-delimited
/// words that contain `<*>` (but are not exactly `<*>`) by a bare `<*>`.
pub fn is_word_atomic_generalization(t: &Template, v: &Template) -> bool {
    let tc = chunks(t.as_str());
    let vc = chunks(v.as_str());
    tc.len() == vc.len()
        && tc.iter().zip(&vc).all(|(tw, vw)| {
            tw == vw || (vw.contains(WILDCARD) && *vw != WILDCARD && *tw == WILDCARD)
        })
}

/// Splits into alternating runs of whitespace and non-whitespace, keeping both.
fn chunks(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut in_space = None;
    for (i, c) in s.char_indices() {
        let space = c.is_whitespace();
        if in_space.is_some_and(|prev| prev != space) {
            out.push(&s[start..i]);
            start = i;
        }
        in_space = Some(space);
    }
    if start < s.len() {
        out.push(&s[start..]);
    }
    out
}
