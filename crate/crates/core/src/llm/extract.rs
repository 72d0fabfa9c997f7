use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;

use crate::template::WILDCARD;

static DEFAULT_LIST_MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[-*]|\d+\.)\s+").unwrap());

const QUOTES: [char; 3] = ['"', '\'', '`'];

/// Line filter that turns a model answer into template candidate strings.
///
/// A line is kept when it carries the wildcard marker or starts with a list
/// marker. One list marker, matching surrounding quotes/backticks and
/// surrounding whitespace are removed. Output keeps first occurrences only.
#[derive(Debug, Clone)]
pub struct Extractor {
    list_marker: Regex,
}

impl Default for Extractor {
    fn default() -> Self {
        Extractor {
            list_marker: DEFAULT_LIST_MARKER.clone(),
        }
    }
}

impl Extractor {
    /// Uses `list_marker` instead of the default `-`, `*`, `N.` markers. The
    /// pattern should be anchored at the line start.
    pub fn with_list_marker(list_marker: Regex) -> Extractor {
        Extractor { list_marker }
    }

    pub fn extract(&self, response: &str) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for line in response.lines() {
            let mut s = line.trim();
            let listed = match self.list_marker.find(s) {
                Some(m) => {
                    s = s[m.end()..].trim();
                    true
                }
                None => false,
            };
            s = strip_quotes(s);
            if s.is_empty() || !(listed || s.contains(WILDCARD)) {
                continue;
            }
            if seen.insert(s) {
                out.push(s.to_owned());
            }
        }
        out
    }
}

fn strip_quotes(mut s: &str) -> &str {
    loop {
        let mut chars = s.chars();
        match (chars.next(), chars.next_back()) {
            (Some(a), Some(b)) if a == b && QUOTES.contains(&a) => {
                s = s[a.len_utf8()..s.len() - b.len_utf8()].trim();
            }
            _ => return s,
        }
    }
}

/// Extraction with the default grammar.
pub fn extract_candidates(response: &str) -> Vec<String> {
    Extractor::default().extract(response)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbered_list() {
        let r = "Templates:\n1. sshd[<*>]: Connection closed by <*>\n2. sshd[<*>]: Failed password for <*>";
        assert_eq!(
            extract_candidates(r),
            vec![
                "sshd[<*>]: Connection closed by <*>",
                "sshd[<*>]: Failed password for <*>"
            ]
        );
    }

    #[test]
    fn prose_only() {
        assert!(extract_candidates("I could not find any templates here.\nSorry!").is_empty());
        assert!(extract_candidates("").is_empty());
    }

    #[test]
    fn duplicates_keep_first_position() {
        let r = "- a <*>\n- b <*>\n* a <*>\n";
        assert_eq!(extract_candidates(r), vec!["a <*>", "b <*>"]);
    }

    #[test]
    fn quotes_backticks_and_bare_lines() {
        let r = "Here you go:\n  `su: pam_unix(su:session): session opened for user <*>`  \n\"kernel: x <*>\"\nsnmpd[<*>]: Connection from UDP: [<*>]:<*>\n```\n";
        assert_eq!(
            extract_candidates(r),
            vec![
                "su: pam_unix(su:session): session opened for user <*>",
                "kernel: x <*>",
                "snmpd[<*>]: Connection from UDP: [<*>]:<*>",
            ]
        );
    }

    #[test]
    fn listed_lines_without_wildcards_are_kept() {
        let r = "1. sshd[<*>]: Server listening on 0.0.0.0 port 22.\n2. systemd: Started Session.\nThis line is prose.";
        assert_eq!(
            extract_candidates(r),
            vec![
                "sshd[<*>]: Server listening on 0.0.0.0 port 22.",
                "systemd: Started Session."
            ]
        );
    }

    #[test]
    fn only_one_marker_is_stripped() {
        assert_eq!(extract_candidates("- - x <*>"), vec!["- x <*>"]);
        // a marker needs trailing whitespace
        assert_eq!(extract_candidates("-x <*>"), vec!["-x <*>"]);
    }

    #[test]
    fn custom_marker() {
        let ex = Extractor::with_list_marker(Regex::new(r"^Template \d+:\s*").unwrap());
        assert_eq!(ex.extract("Template 1: foo bar\n- baz"), vec!["foo bar"]);
    }
}
