//! Templates: alternating literal/wildcard token sequences with a canonical
//! one-line text form, full-line matching, and the comparison relations used by
//! mining and evaluation.

mod inclusion;
mod matcher;
mod relations;

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ingest::LogMessage;
use crate::par::Exec;

pub use inclusion::{language_subset, strict_subset};
pub use relations::{is_constant_specialization, is_word_atomic_generalization};

/// The wildcard marker. Matches one or more arbitrary characters.
pub const WILDCARD: &str = "<*>";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("empty template")]
    EmptyTemplate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    /// Verbatim text. Never empty, never contains the wildcard marker.
    Literal(String),
    Wildcard,
}

impl Token {
    pub fn is_wildcard(&self) -> bool {
        matches!(self, Token::Wildcard)
    }

    pub fn literal(&self) -> Option<&str> {
        match self {
            Token::Literal(s) => Some(s),
            Token::Wildcard => None,
        }
    }
}

/// A parsed template in normal form.
///
/// Identity (`Eq`, `Hash`) is the canonical text form; the representative is
/// metadata and does not take part in comparisons.
#[derive(Debug, Clone)]
pub struct Template {
    tokens: Vec<Token>,
    source: String,
    representative: Option<LogMessage>,
}

impl Template {
    /// Parses the canonical text form. A single trailing line terminator is
    /// ignored; runs of `<*>` collapse into one wildcard.
    pub fn parse(s: &str) -> Result<Template, TemplateError> {
        let s = trim_line_terminator(s);
        if s.trim().is_empty() {
            return Err(TemplateError::EmptyTemplate);
        }
        let mut tokens: Vec<Token> = Vec::new();
        for (i, piece) in s.split(WILDCARD).enumerate() {
            if i > 0 && !matches!(tokens.last(), Some(Token::Wildcard)) {
                tokens.push(Token::Wildcard);
            }
            if !piece.is_empty() {
                tokens.push(Token::Literal(piece.to_owned()));
            }
        }
        Ok(Template::from_normal_tokens(tokens))
    }

    /// Builds a template from arbitrary tokens, normalising adjacency.
    /// Empty literals are dropped.
    pub fn from_tokens(raw: impl IntoIterator<Item = Token>) -> Result<Template, TemplateError> {
        let mut tokens: Vec<Token> = Vec::new();
        for tok in raw {
            match tok {
                Token::Wildcard => {
                    if !matches!(tokens.last(), Some(Token::Wildcard)) {
                        tokens.push(Token::Wildcard);
                    }
                }
                Token::Literal(s) if s.is_empty() => {}
                Token::Literal(s) => {
                    if let Some(Token::Literal(prev)) = tokens.last_mut() {
                        prev.push_str(&s);
                    } else {
                        tokens.push(Token::Literal(s));
                    }
                }
            }
        }
        // A literal may have been assembled to contain the marker; the text form
        // is authoritative, so re-parse it.
        let text: String = tokens
            .iter()
            .map(|t| t.literal().unwrap_or(WILDCARD))
            .collect();
        Template::parse(&text)
    }

    fn from_normal_tokens(tokens: Vec<Token>) -> Template {
        let source = tokens
            .iter()
            .map(|t| t.literal().unwrap_or(WILDCARD))
            .collect();
        Template {
            tokens,
            source,
            representative: None,
        }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Canonical text form.
    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn representative(&self) -> Option<&LogMessage> {
        self.representative.as_ref()
    }

    /// Attaches `msg` as representative, or returns `None` if the template does
    /// not match the message text.
    pub fn with_representative(mut self, msg: LogMessage) -> Option<Template> {
        if !self.matches(&msg.text) {
            return None;
        }
        self.representative = Some(msg);
        Some(self)
    }

    pub fn wildcard_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_wildcard()).count()
    }

    /// Total number of bytes in literal tokens.
    pub fn literal_len(&self) -> usize {
        self.tokens
            .iter()
            .filter_map(Token::literal)
            .map(str::len)
            .sum()
    }

    /// Full-line match. Each wildcard consumes at least one character.
    pub fn matches(&self, text: &str) -> bool {
        matcher::match_tokens(&self.tokens, text)
    }

    pub fn match_set(&self, log: &[LogMessage]) -> MatchSet {
        self.match_set_with(log, Exec::default())
    }

    pub fn match_set_with(&self, log: &[LogMessage], exec: Exec) -> MatchSet {
        MatchSet(exec.filter_indices(log.len(), |i| self.matches(&log[i].text)))
    }
}

pub fn parse_template(s: &str) -> Result<Template, TemplateError> {
    Template::parse(s)
}

pub fn matches(t: &Template, text: &str) -> bool {
    t.matches(text)
}

pub fn match_set(t: &Template, log: &[LogMessage]) -> MatchSet {
    t.match_set(log)
}

fn trim_line_terminator(s: &str) -> &str {
    let s = s.strip_suffix('\n').unwrap_or(s);
    s.strip_suffix('\r').unwrap_or(s)
}

impl PartialEq for Template {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Eq for Template {}

impl Hash for Template {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.source.hash(state)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for Template {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Template::parse(s)
    }
}

impl Serialize for Template {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Template {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Template::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Ascending, duplicate-free message positions into a fixed message list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatchSet(Vec<usize>);

impl MatchSet {
    pub fn from_sorted(indices: Vec<usize>) -> MatchSet {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        MatchSet(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &MatchSet) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().all(|&i| other.contains(i))
    }

    pub fn intersects(&self, other: &MatchSet) -> bool {
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}
