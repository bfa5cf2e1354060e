//! Normalized commit records and line-delimited ingestion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Normalized repository identity: host, owner, and name, all lowercase
/// with any `.git` suffix stripped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RepoId {
    pub host: String,
    pub owner: String,
    pub name: String,
}

impl RepoId {
    /// Parse and normalize a repository reference: a URL
    /// (`https://github.com/Owner/Name.git`), an ssh remote, or a plain
    /// `host/owner/name` triple.
    pub fn parse(raw: &str) -> Result<RepoId, String> {
        let mut s = raw.trim().to_ascii_lowercase();
        for prefix in ["https://", "http://", "git://", "ssh://", "git@"] {
            if let Some(rest) = s.strip_prefix(prefix) {
                s = rest.replace(':', "/");
                break;
            }
        }
        let s = s.trim_end_matches('/');
        let s = s.strip_suffix(".git").unwrap_or(s);
        let parts: Vec<&str> = s.split('/').filter(|p| !p.is_empty()).collect();
        if parts.len() < 3 {
            return Err(format!("repository reference {raw:?} is not host/owner/name"));
        }
        // Paths with extra segments (gitlab subgroups) keep the last piece
        // as the name and fold the middle into the owner.
        let host = parts[0].to_string();
        let name = parts[parts.len() - 1].to_string();
        let owner = parts[1..parts.len() - 1].join("/");
        Ok(RepoId { host, owner, name })
    }
}

impl fmt::Display for RepoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.host, self.owner, self.name)
    }
}

impl TryFrom<String> for RepoId {
    type Error = String;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        RepoId::parse(&value)
    }
}

impl From<RepoId> for String {
    fn from(value: RepoId) -> Self {
        value.to_string()
    }
}

/// Classification label of a commit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "VFC", alias = "vfc")]
    Vfc,
    #[serde(rename = "NonVFC", alias = "non-vfc", alias = "nonvfc")]
    NonVfc,
}

/// Where a label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Manual,
    Advisory,
    Tool,
    Synthetic,
}

/// One commit: identity, content, label, and provenance metadata. Unknown
/// input fields are preserved in `extra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub repo: RepoId,
    pub sha: String,
    pub timestamp: i64,
    #[serde(default)]
    pub message: String,
    #[serde(default)]
    pub diff: String,
    pub label: Label,
    #[serde(default)]
    pub label_source: BTreeSet<LabelSource>,
    #[serde(default)]
    pub cve_ids: BTreeSet<String>,
    #[serde(default)]
    pub languages: BTreeSet<String>,
    #[serde(default)]
    pub group_id: String,
    #[serde(default)]
    pub sources: BTreeSet<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl CommitRecord {
    /// Stable identity used in split tables and prediction files.
    pub fn record_id(&self) -> String {
        format!("{}@{}", self.repo, self.sha)
    }

    pub fn is_vfc(&self) -> bool {
        self.label == Label::Vfc
    }

    /// Grouping key for group-stratified splits: the explicit group id
    /// when present, otherwise the repository name (so forks and mirrors
    /// of the same project share a group by default).
    pub fn group_key(&self) -> &str {
        if self.group_id.is_empty() {
            &self.repo.name
        } else {
            &self.group_id
        }
    }

    fn normalize(&mut self) -> Result<(), String> {
        self.sha = self.sha.trim().to_ascii_lowercase();
        if self.sha.len() != 40 || !self.sha.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("sha {:?} is not 40 hex characters", self.sha));
        }
        self.languages = self
            .languages
            .iter()
            .map(|l| l.to_ascii_lowercase())
            .collect();
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path:?}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A rejected input line.
#[derive(Debug, Clone, Serialize)]
pub struct LineViolation {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

/// Result of ingesting a record file: normalized records in input order
/// plus per-line schema violations for the rejected ones.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub records: Vec<CommitRecord>,
    pub violations: Vec<LineViolation>,
}

/// Read a line-delimited record file. Schema violations are collected per
/// line; valid lines are kept.
pub fn ingest(path: &Path) -> Result<IngestReport, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(ingest_str(&text))
}

/// [`ingest`] over already-loaded text.
pub fn ingest_str(text: &str) -> IngestReport {
    let mut report = IngestReport::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CommitRecord>(line) {
            Ok(mut record) => match record.normalize() {
                Ok(()) => report.records.push(record),
                Err(message) => report.violations.push(LineViolation {
                    line: i + 1,
                    message,
                }),
            },
            Err(e) => report.violations.push(LineViolation {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repo_identity_is_normalized() {
        let r = RepoId::parse("https://GitHub.com/FFmpeg/FFmpeg.git").unwrap();
        assert_eq!(r.to_string(), "github.com/ffmpeg/ffmpeg");
        let ssh = RepoId::parse("git@github.com:Owner/Repo.git").unwrap();
        assert_eq!(ssh.to_string(), "github.com/owner/repo");
        let plain = RepoId::parse("github.com/a/b").unwrap();
        assert_eq!(plain.to_string(), "github.com/a/b");
    }

    #[test]
    fn empty_input_ingests_to_nothing() {
        let report = ingest_str("");
        assert!(report.records.is_empty());
        assert!(report.violations.is_empty());
    }

    #[test]
    fn uppercase_repo_and_sha_are_normalized() {
        let line = format!(
            r#"{{"repo":"https://github.com/Apache/HTTPD.git","sha":"{}","timestamp":100,"label":"VFC"}}"#,
            "ABCDEF0123456789ABCDEF0123456789ABCDEF01"
        );
        let report = ingest_str(&line);
        assert_eq!(report.records.len(), 1);
        let r = &report.records[0];
        assert_eq!(r.repo.to_string(), "github.com/apache/httpd");
        assert_eq!(r.sha, "abcdef0123456789abcdef0123456789abcdef01");
    }

    #[test]
    fn missing_sha_is_rejected_with_line_number() {
        let text = format!(
            "{}\n{}\n",
            r#"{"repo":"github.com/a/b","timestamp":1,"label":"VFC"}"#,
            format!(
                r#"{{"repo":"github.com/a/b","sha":"{}","timestamp":2,"label":"NonVFC"}}"#,
                "a".repeat(40)
            ),
        );
        let report = ingest_str(&text);
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].line, 1);
    }

    #[test]
    fn bad_sha_is_rejected() {
        let line = r#"{"repo":"github.com/a/b","sha":"xyz","timestamp":1,"label":"VFC"}"#;
        let report = ingest_str(line);
        assert!(report.records.is_empty());
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn unknown_fields_pass_through() {
        let line = format!(
            r#"{{"repo":"github.com/a/b","sha":"{}","timestamp":1,"label":"VFC","custom":42}}"#,
            "b".repeat(40)
        );
        let report = ingest_str(&line);
        let r = &report.records[0];
        assert_eq!(r.extra.get("custom"), Some(&serde_json::json!(42)));
        let round = serde_json::to_string(r).unwrap();
        assert!(round.contains("\"custom\":42"));
    }

    #[test]
    fn group_key_defaults_to_repo_name() {
        let line = format!(
            r#"{{"repo":"github.com/fork/linux","sha":"{}","timestamp":1,"label":"VFC"}}"#,
            "c".repeat(40)
        );
        let report = ingest_str(&line);
        assert_eq!(report.records[0].group_key(), "linux");
    }
}
