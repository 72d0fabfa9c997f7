#![allow(dead_code)]

pub mod synth;

use llmtd_core::template::{Template, Token};
use regex::Regex;

pub const ALPHABET: [char; 3] = ['a', 'b', ' '];

/// Independent matcher: each wildcard becomes `.+`, the whole pattern is
/// anchored, `.` also matches newlines.
pub fn oracle_regex(t: &Template) -> Regex {
    let body: String = t
        .tokens()
        .iter()
        .map(|tok| match tok {
            Token::Literal(s) => regex::escape(s),
            Token::Wildcard => "(.+)".to_owned(),
        })
        .collect();
    Regex::new(&format!("(?s)^{body}$")).unwrap()
}

/// All strings over `ALPHABET` of length `0..=max_len`.
pub fn all_strings(max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for c in ALPHABET {
                let mut s2 = s.clone();
                s2.push(c);
                next.push(s2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// All non-empty literals over `ALPHABET` with length `1..=max_len`.
pub fn all_literals(max_len: usize) -> Vec<String> {
    all_strings(max_len)
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect()
}

/// Every normal-form template with at most `max_tokens` tokens whose literals
/// are drawn from `literals`. Whitespace-only templates are skipped.
pub fn all_templates(literals: &[String], max_tokens: usize) -> Vec<Template> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Option<String>>> = vec![vec![]];
    while let Some(seq) = stack.pop() {
        if !seq.is_empty() {
            let text: String = seq.iter().map(|t| t.as_deref().unwrap_or("<*>")).collect();
            // whitespace-only text is not a valid template
            if let Ok(t) = Template::parse(&text) {
                out.push(t);
            }
        }
        if seq.len() == max_tokens {
            continue;
        }
        let last_is_wild = seq.last().map(|t| t.is_none());
        if last_is_wild != Some(true) {
            let mut s = seq.clone();
            s.push(None);
            stack.push(s);
        }
        if last_is_wild != Some(false) {
            for l in literals {
                let mut s = seq.clone();
                s.push(Some(l.clone()));
                stack.push(s);
            }
        }
    }
    out
}

/// Membership bitmap of `t` over `strings`, computed with the regex oracle.
pub fn membership(t: &Template, strings: &[String]) -> Vec<bool> {
    let re = oracle_regex(t);
    strings.iter().map(|s| re.is_match(s)).collect()
}

pub fn bitmap_subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(x, y)| !*x || *y)
}
