//! The enriched diff representation: tagged lines with provenance,
//! renderable as unified-diff flavored text and as annotated records.

use serde::{Deserialize, Serialize};

use super::EnrichmentLevel;
use crate::budget::LineClass;
use crate::diff::DocumentLine;

/// Tag of one merged output line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineTag {
    #[serde(rename = "changed+")]
    ChangedAdd,
    #[serde(rename = "changed-")]
    ChangedDel,
    #[serde(rename = "ctx-control")]
    CtxControl,
    #[serde(rename = "ctx-dataflow")]
    CtxDataflow,
    /// Raw diff context carried through a fallback or residual section.
    #[serde(rename = "ctx-raw")]
    CtxRaw,
    #[serde(rename = "header")]
    Header,
}

/// Why a context line is part of the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    /// Innermost control-flow construct of a changed statement.
    Enclosure,
    /// Reached by the backward slice at the given pass.
    Backward { depth: usize },
    /// Reached by the forward slice at the given pass.
    Forward { depth: usize },
    /// File degraded to its raw diff (unparseable, binary, or missing
    /// snapshots).
    Fallback,
    /// Changed lines outside every function.
    Residual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichedLine {
    pub tag: LineTag,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub old_lineno: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub new_lineno: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<Provenance>,
}

/// One function (or one fallback/residual block) of merged output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichedSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(default)]
    pub fallback: bool,
    pub lines: Vec<EnrichedLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichedFile {
    pub old_path: String,
    pub new_path: String,
    pub sections: Vec<EnrichedSection>,
}

/// The merged, aligned enriched diff of one commit at a chosen level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedDiff {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub level: EnrichmentLevel,
    pub files: Vec<EnrichedFile>,
    /// Number of files that degraded to their raw diff.
    #[serde(default)]
    pub fallback_files: usize,
}

impl EnrichedDiff {
    /// All changed lines (text with sign) in output order, for
    /// change-preservation checks.
    pub fn changed_lines(&self) -> Vec<(LineTag, &str)> {
        self.files
            .iter()
            .flat_map(|f| f.sections.iter())
            .flat_map(|s| s.lines.iter())
            .filter(|l| matches!(l.tag, LineTag::ChangedAdd | LineTag::ChangedDel))
            .map(|l| (l.tag, l.text.as_str()))
            .collect()
    }

    /// All context lines (any `Ctx*` tag) in output order.
    pub fn context_lines(&self) -> Vec<&EnrichedLine> {
        self.files
            .iter()
            .flat_map(|f| f.sections.iter())
            .flat_map(|s| s.lines.iter())
            .filter(|l| {
                matches!(
                    l.tag,
                    LineTag::CtxControl | LineTag::CtxDataflow | LineTag::CtxRaw
                )
            })
            .collect()
    }

    /// Unified-diff flavored text: per file a `---`/`+++` header pair,
    /// then hunks with recomputed `@@` headers; function names appear as
    /// hunk section text.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for line in self.document_lines() {
            out.push_str(&line.rendered);
            out.push('\n');
        }
        out
    }

    /// Document view used by token accounting and truncation. Mirrors
    /// `render_text` line for line.
    pub fn document_lines(&self) -> Vec<DocumentLine> {
        let mut out = Vec::new();
        if let Some(msg) = &self.message {
            for line in msg.split('\n') {
                out.push(DocumentLine {
                    class: LineClass::Message,
                    text: line.to_string(),
                    rendered: line.to_string(),
                    file: None,
                });
            }
        }
        for (fi, file) in self.files.iter().enumerate() {
            if file.sections.iter().all(|s| s.lines.is_empty()) {
                continue;
            }
            let push_header = |out: &mut Vec<DocumentLine>, text: String| {
                out.push(DocumentLine {
                    class: LineClass::Header,
                    text: text.clone(),
                    rendered: text,
                    file: Some(fi),
                });
            };
            push_header(&mut out, format!("--- a/{}", file.old_path));
            push_header(&mut out, format!("+++ b/{}", file.new_path));
            for section in &file.sections {
                for (start, end) in hunk_runs(&section.lines) {
                    let run = &section.lines[start..end];
                    push_header(&mut out, hunk_header(run, section.function.as_deref()));
                    for line in run {
                        let (class, marker) = match line.tag {
                            LineTag::ChangedAdd => (LineClass::Change, "+"),
                            LineTag::ChangedDel => (LineClass::Change, "-"),
                            LineTag::CtxControl | LineTag::CtxDataflow | LineTag::CtxRaw => {
                                (LineClass::Context, " ")
                            }
                            LineTag::Header => (LineClass::Header, ""),
                        };
                        out.push(DocumentLine {
                            class,
                            text: line.text.clone(),
                            rendered: format!("{marker}{}", line.text),
                            file: Some(fi),
                        });
                    }
                }
            }
        }
        out
    }
}

/// Split a section's lines into contiguous runs: a new hunk starts when
/// the old/new line numbering jumps.
fn hunk_runs(lines: &[EnrichedLine]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0usize;
    let mut expected_old: Option<u32> = None;
    let mut expected_new: Option<u32> = None;
    for (i, line) in lines.iter().enumerate() {
        let breaks = match (line.old_lineno, line.new_lineno) {
            (Some(o), Some(n)) => {
                expected_old.is_some_and(|e| o != e) || expected_new.is_some_and(|e| n != e)
            }
            (Some(o), None) => expected_old.is_some_and(|e| o != e),
            (None, Some(n)) => expected_new.is_some_and(|e| n != e),
            (None, None) => false,
        };
        if breaks && i > start {
            runs.push((start, i));
            start = i;
            expected_old = None;
            expected_new = None;
        }
        if let Some(o) = line.old_lineno {
            expected_old = Some(o + 1);
        }
        if let Some(n) = line.new_lineno {
            expected_new = Some(n + 1);
        }
    }
    if start < lines.len() {
        runs.push((start, lines.len()));
    }
    runs
}

fn hunk_header(run: &[EnrichedLine], function: Option<&str>) -> String {
    let old_start = run.iter().find_map(|l| l.old_lineno).unwrap_or(0);
    let new_start = run.iter().find_map(|l| l.new_lineno).unwrap_or(0);
    let old_count = run.iter().filter(|l| l.old_lineno.is_some()).count();
    let new_count = run.iter().filter(|l| l.new_lineno.is_some()).count();
    let side = |start: u32, count: usize| {
        if count == 1 {
            format!("{start}")
        } else {
            format!("{start},{count}")
        }
    };
    let mut header = format!(
        "@@ -{} +{} @@",
        side(old_start, old_count),
        side(new_start, new_count)
    );
    if let Some(name) = function {
        header.push(' ');
        header.push_str(name);
    }
    header
}
