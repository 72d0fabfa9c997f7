//! Event log ingestion: BSD syslog header stripping, application partitioning,
//! and template-list files.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::template::{Template, TemplateError, WILDCARD};

/// App name assigned to lines without a recognizable syslog tag.
pub const UNKNOWN_APP: &str = "unknown";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("empty line")]
    EmptyLine,
    #[error("message contains the wildcard marker \"<*>\"")]
    ContainsWildcardMarker,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: duplicate template {template:?}")]
    DuplicateTemplate { line: usize, template: String },
    #[error("line {line}: {source}")]
    Template {
        line: usize,
        #[source]
        source: TemplateError,
    },
    #[error("no templates found")]
    EmptyGroundTruth,
}

/// One event-log line reduced to its syslog tag and free-form message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogMessage {
    /// Zero-based line number in the source file.
    pub index: usize,
    pub app: String,
    /// Tag plus message; always a suffix of `raw`.
    pub text: String,
    pub raw: String,
}

impl LogMessage {
    /// A message whose text is taken as-is, with no header processing.
    pub fn bare(index: usize, text: &str) -> LogMessage {
        LogMessage {
            index,
            app: UNKNOWN_APP.to_owned(),
            text: text.to_owned(),
            raw: text.to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeaderMode {
    /// Strip RFC 3164 priority, timestamp and hostname when present.
    #[default]
    Syslog,
    /// Each line already starts at the syslog tag.
    NoHeader,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub header: HeaderMode,
    /// Removed from the start of each line before anything else, e.g. an
    /// ISO-8601 timestamp and hostname.
    pub strip_prefix: Option<Regex>,
}

static PRIORITY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^<\d{1,3}>").unwrap());
static TIMESTAMP: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec) [ \d]\d \d\d:\d\d:\d\d\s+")
        .unwrap()
});
static HOSTNAME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\S+\s+").unwrap());
static TAG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([^\s\[\]:]+)(?:\[[^\]\s]*\])?:(?:\s|$)").unwrap());

/// Parses one line with default options (RFC 3164 header stripping).
pub fn parse_syslog_line(line: &str) -> Result<LogMessage, IngestError> {
    parse_line(line, 0, &IngestOptions::default())
}

pub fn parse_line(
    line: &str,
    index: usize,
    opts: &IngestOptions,
) -> Result<LogMessage, IngestError> {
    let raw = line.trim_end_matches(['\r', '\n']);
    if raw.trim().is_empty() {
        return Err(IngestError::EmptyLine);
    }
    let mut rest = raw;
    if let Some(re) = &opts.strip_prefix {
        if let Some(m) = re.find(rest).filter(|m| m.start() == 0) {
            rest = &rest[m.end()..];
        }
    }
    if opts.header == HeaderMode::Syslog {
        rest = strip_header(rest);
    }
    if rest.trim().is_empty() {
        return Err(IngestError::EmptyLine);
    }
    if rest.contains(WILDCARD) {
        return Err(IngestError::ContainsWildcardMarker);
    }
    let app = TAG
        .captures(rest)
        .map(|c| c[1].to_owned())
        .unwrap_or_else(|| UNKNOWN_APP.to_owned());
    Ok(LogMessage {
        index,
        app,
        text: rest.to_owned(),
        raw: raw.to_owned(),
    })
}

fn strip_header(line: &str) -> &str {
    let mut rest = line;
    if let Some(m) = PRIORITY.find(rest) {
        rest = &rest[m.end()..];
    }
    if let Some(m) = TIMESTAMP.find(rest) {
        rest = &rest[m.end()..];
        // RFC 3164 puts a hostname here, but some senders omit it; a token that
        // already looks like a tag is kept.
        if !TAG.is_match(rest) {
            if let Some(m) = HOSTNAME.find(rest) {
                rest = &rest[m.end()..];
            }
        }
    }
    rest
}

/// Parsed log plus the lines that were refused.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub messages: Vec<LogMessage>,
    /// (line index, reason) for non-empty lines that could not be used.
    pub rejected: Vec<(usize, IngestError)>,
    pub empty_lines: usize,
}

/// Parses a whole log. Lines carrying the wildcard marker are rejected rather
/// than escaped; blank lines are skipped.
pub fn parse_log(content: &str, opts: &IngestOptions) -> IngestReport {
    let mut report = IngestReport::default();
    for (i, line) in content.lines().enumerate() {
        match parse_line(line, i, opts) {
            Ok(msg) => report.messages.push(msg),
            Err(IngestError::EmptyLine) => report.empty_lines += 1,
            Err(e) => report.rejected.push((i, e)),
        }
    }
    report
}

pub fn read_log(path: &Path, opts: &IngestOptions) -> Result<IngestReport, IngestError> {
    let content = read_to_string(path)?;
    Ok(parse_log(&content, opts))
}

fn read_to_string(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Messages of one application, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub app: String,
    pub messages: Vec<LogMessage>,
}

/// Groups messages by application. Partitions come out sorted by app name.
pub fn partition_by_app(log: &[LogMessage]) -> Vec<Partition> {
    let mut groups: BTreeMap<&str, Vec<LogMessage>> = BTreeMap::new();
    for msg in log {
        groups
            .entry(msg.app.as_str())
            .or_default()
            .push(msg.clone());
    }
    groups
        .into_iter()
        .map(|(app, messages)| Partition {
            app: app.to_owned(),
            messages,
        })
        .collect()
}

/// Reference templates. Canonical forms are pairwise distinct and the set is
/// never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    templates: Vec<Template>,
}

impl GroundTruth {
    pub fn new(templates: Vec<Template>) -> Result<GroundTruth, IngestError> {
        if templates.is_empty() {
            return Err(IngestError::EmptyGroundTruth);
        }
        let mut seen = HashMap::new();
        for (i, t) in templates.iter().enumerate() {
            if seen.insert(t.as_str(), i).is_some() {
                return Err(IngestError::DuplicateTemplate {
                    line: i + 1,
                    template: t.as_str().to_owned(),
                });
            }
        }
        Ok(GroundTruth { templates })
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// Reads a one-template-per-line list. Blank lines and `#` comments are
/// skipped; duplicates are kept. Returned line numbers are 1-based.
pub fn parse_template_list(content: &str) -> Result<Vec<(usize, Template)>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let t = Template::parse(line).map_err(|source| IngestError::Template {
            line: i + 1,
            source,
        })?;
        out.push((i + 1, t));
    }
    Ok(out)
}

pub fn load_template_list(path: &Path) -> Result<Vec<Template>, IngestError> {
    let content = read_to_string(path)?;
    Ok(parse_template_list(&content)?
        .into_iter()
        .map(|(_, t)| t)
        .collect())
}

pub fn parse_ground_truth(content: &str) -> Result<GroundTruth, IngestError> {
    let list = parse_template_list(content)?;
    let mut seen = HashMap::new();
    for (line, t) in &list {
        if seen.insert(t.as_str().to_owned(), *line).is_some() {
            return Err(IngestError::DuplicateTemplate {
                line: *line,
                template: t.as_str().to_owned(),
            });
        }
    }
    GroundTruth::new(list.into_iter().map(|(_, t)| t).collect())
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth, IngestError> {
    parse_ground_truth(&read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rfc3164_header() {
        let m = parse_syslog_line(
            "<34>Oct 11 22:14:15 host1 sshd[12992]: Accepted publickey for john from 10.1.1.1 port 53323 ssh2",
        )
        .unwrap();
        assert_eq!(m.app, "sshd");
        assert_eq!(
            m.text,
            "sshd[12992]: Accepted publickey for john from 10.1.1.1 port 53323 ssh2"
        );
        assert!(m.raw.ends_with(&m.text));
    }

    #[test]
    fn without_priority() {
        let m = parse_syslog_line("Oct 11 22:14:15 host1 su: pam_unix session opened").unwrap();
        assert_eq!(m.app, "su");
        assert_eq!(m.text, "su: pam_unix session opened");
    }

    #[test]
    fn untagged_falls_back_to_unknown() {
        let m = parse_syslog_line("free text with no tag").unwrap();
        assert_eq!(m.app, UNKNOWN_APP);
        assert_eq!(m.text, "free text with no tag");
    }

    #[test]
    fn space_padded_day_and_missing_hostname() {
        let m = parse_syslog_line("Feb  3 01:02:03 web apache2: PHP Notice: x").unwrap();
        assert_eq!(m.app, "apache2");
        assert_eq!(m.text, "apache2: PHP Notice: x");
        let m = parse_syslog_line("Feb  3 01:02:03 snmpd[77]: Connection from UDP").unwrap();
        assert_eq!(m.app, "snmpd");
        assert_eq!(m.text, "snmpd[77]: Connection from UDP");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_syslog_line(""), Err(IngestError::EmptyLine)));
        assert!(matches!(
            parse_syslog_line("  \r\n"),
            Err(IngestError::EmptyLine)
        ));
        assert!(matches!(
            parse_syslog_line("Oct 11 22:14:15 host1 "),
            Err(IngestError::EmptyLine)
        ));
        assert!(matches!(
            parse_syslog_line("Oct 11 22:14:15 h sshd[1]: got <*> here"),
            Err(IngestError::ContainsWildcardMarker)
        ));
    }

    #[test]
    fn no_header_mode_keeps_timestamp_like_text() {
        let opts = IngestOptions {
            header: HeaderMode::NoHeader,
            strip_prefix: None,
        };
        let m = parse_line("Oct 11 22:14:15 host1 su: x", 4, &opts).unwrap();
        assert_eq!(m.app, UNKNOWN_APP);
        assert_eq!(m.index, 4);
        let m = parse_line("sshd[1]: x", 0, &opts).unwrap();
        assert_eq!(m.app, "sshd");
    }

    #[test]
    fn strip_prefix_regex() {
        let opts = IngestOptions {
            header: HeaderMode::Syslog,
            strip_prefix: Some(Regex::new(r"\d{4}-\d\d-\d\dT\S+ \S+ ").unwrap()),
        };
        let m = parse_line(
            "2024-03-01T10:00:00+00:00 gw1 sshd[9]: Connection closed",
            0,
            &opts,
        )
        .unwrap();
        assert_eq!(m.app, "sshd");
        assert_eq!(m.text, "sshd[9]: Connection closed");
    }

    #[test]
    fn parse_log_counts_rejections() {
        let report = parse_log(
            "sshd[1]: a\r\n\nsshd[2]: <*>\nsu: b\n",
            &IngestOptions::default(),
        );
        assert_eq!(report.messages.len(), 2);
        assert_eq!(report.messages[1].index, 3);
        assert_eq!(report.empty_lines, 1);
        assert_eq!(report.rejected.len(), 1);
        assert_eq!(report.rejected[0].0, 2);
    }

    #[test]
    fn partitions() {
        let log: Vec<LogMessage> = ["sshd[1]: a", "su: x", "sshd[2]: b", "su: y", "sshd[3]: c"]
            .iter()
            .enumerate()
            .map(|(i, l)| parse_line(l, i, &IngestOptions::default()).unwrap())
            .collect();
        let parts = partition_by_app(&log);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].app, "sshd");
        assert_eq!(
            parts[0]
                .messages
                .iter()
                .map(|m| m.index)
                .collect::<Vec<_>>(),
            vec![0, 2, 4]
        );
        assert_eq!(parts[1].messages.len(), 2);

        assert!(partition_by_app(&[]).is_empty());

        let same = &log[..1];
        let parts = partition_by_app(same);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].messages, same);
    }

    #[test]
    fn ground_truth_files() {
        let gt = parse_ground_truth("# comment\nsshd[<*>]: a <*>\n\nsu: b\n").unwrap();
        assert_eq!(gt.len(), 2);

        assert!(matches!(
            parse_ground_truth("# only\n# comments\n"),
            Err(IngestError::EmptyGroundTruth)
        ));
        match parse_ground_truth("a <*>\nb\na <*>\n") {
            Err(IngestError::DuplicateTemplate { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        // duplicates after normalisation count too
        assert!(matches!(
            parse_ground_truth("a <*><*>\na <*>\n"),
            Err(IngestError::DuplicateTemplate { .. })
        ));
        assert!(parse_ground_truth("a\n   \n").is_ok());
    }

    #[test]
    fn template_list_keeps_duplicates() {
        let list = parse_template_list("x <*>\nx <*>\n").unwrap();
        assert_eq!(list.len(), 2);
    }
}
