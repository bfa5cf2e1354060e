//! Unified diff model: parsing, regeneration, and rendering.
//!
//! The types here mirror the textual structure of a git-flavored unified
//! diff. Parsing preserves enough of the original bytes (file header lines,
//! hunk section text, trailing-newline state) that [`render_unified_diff`]
//! is a byte-exact inverse of [`parse_unified_diff`] on canonical git
//! output.

mod myers;
mod parse;
mod render;

pub use myers::{compute_unified_diff, compute_unified_diff_with_paths, diff_lines, LineEdit};
pub use parse::{parse_unified_diff, parse_unified_diff_bytes, ParseError};
pub use render::{render_unified_diff, RenderError};

use serde::{Deserialize, Serialize};

use crate::budget::{LineClass, TokenClassCounts, Tokenizer};

/// Classification of a single line of a diff document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineKind {
    Added,
    Deleted,
    Context,
    Header,
    Message,
}

/// One line of a diff, with its position in the old and new file versions.
///
/// `Added` lines carry only `new_lineno`, `Deleted` lines only `old_lineno`,
/// `Context` lines both, `Header`/`Message` lines neither.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffLine {
    pub kind: LineKind,
    /// Line content without the leading `+`/`-`/` ` marker.
    pub text: String,
    pub old_lineno: Option<u32>,
    pub new_lineno: Option<u32>,
}

impl DiffLine {
    pub fn added(text: impl Into<String>, new_lineno: u32) -> Self {
        DiffLine {
            kind: LineKind::Added,
            text: text.into(),
            old_lineno: None,
            new_lineno: Some(new_lineno),
        }
    }

    pub fn deleted(text: impl Into<String>, old_lineno: u32) -> Self {
        DiffLine {
            kind: LineKind::Deleted,
            text: text.into(),
            old_lineno: Some(old_lineno),
            new_lineno: None,
        }
    }

    pub fn context(text: impl Into<String>, old_lineno: u32, new_lineno: u32) -> Self {
        DiffLine {
            kind: LineKind::Context,
            text: text.into(),
            old_lineno: Some(old_lineno),
            new_lineno: Some(new_lineno),
        }
    }

    /// Marker lines such as `\ No newline at end of file` that sit inside a
    /// hunk body but do not count toward either side.
    pub fn marker(text: impl Into<String>) -> Self {
        DiffLine {
            kind: LineKind::Header,
            text: text.into(),
            old_lineno: None,
            new_lineno: None,
        }
    }
}

/// One contiguous change region of a file diff.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: u32,
    pub old_count: u32,
    pub new_start: u32,
    pub new_count: u32,
    /// Text after the closing `@@` of the hunk header (git function context).
    pub section: String,
    /// Body lines. Only `Added`/`Deleted`/`Context` lines count toward the
    /// declared counts; `Header`-kind marker lines are carried verbatim.
    pub lines: Vec<DiffLine>,
}

impl Hunk {
    /// Number of `Deleted` + `Context` lines in the body.
    pub fn body_old_count(&self) -> u32 {
        self.lines
            .iter()
            .filter(|l| matches!(l.kind, LineKind::Deleted | LineKind::Context))
            .count() as u32
    }

    /// Number of `Added` + `Context` lines in the body.
    pub fn body_new_count(&self) -> u32 {
        self.lines
            .iter()
            .filter(|l| matches!(l.kind, LineKind::Added | LineKind::Context))
            .count() as u32
    }

    /// Declared counts match the body composition.
    pub fn counts_consistent(&self) -> bool {
        self.old_count == self.body_old_count() && self.new_count == self.body_new_count()
    }

    /// The `@@ -a,b +c,d @@ section` header line, recomputed from counts.
    pub fn header_line(&self) -> String {
        fn side(start: u32, count: u32) -> String {
            if count == 1 {
                format!("{start}")
            } else {
                format!("{start},{count}")
            }
        }
        let mut s = format!(
            "@@ -{} +{} @@",
            side(self.old_start, self.old_count),
            side(self.new_start, self.new_count)
        );
        if !self.section.is_empty() {
            s.push(' ');
            s.push_str(&self.section);
        }
        s
    }
}

/// Diff of one file within a commit.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FileDiff {
    pub old_path: String,
    pub new_path: String,
    pub is_binary: bool,
    /// Raw header lines (`diff --git`, `index`, `---`, `+++`, mode/rename
    /// markers) exactly as they appeared in the input.
    pub headers: Vec<String>,
    pub hunks: Vec<Hunk>,
}

impl FileDiff {
    /// 1-based old-file line numbers of all deleted lines.
    pub fn deleted_line_numbers(&self) -> Vec<u32> {
        self.hunks
            .iter()
            .flat_map(|h| h.lines.iter())
            .filter(|l| l.kind == LineKind::Deleted)
            .filter_map(|l| l.old_lineno)
            .collect()
    }

    /// 1-based new-file line numbers of all added lines.
    pub fn added_line_numbers(&self) -> Vec<u32> {
        self.hunks
            .iter()
            .flat_map(|h| h.lines.iter())
            .filter(|l| l.kind == LineKind::Added)
            .filter_map(|l| l.new_lineno)
            .collect()
    }
}

/// A whole commit's diff: optional commit message plus per-file diffs in
/// input order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CommitDiff {
    pub message: Option<String>,
    /// Lines appearing before the first file header (e.g. `git show` commit
    /// metadata). Classified as `Header` lines.
    pub preamble: Vec<String>,
    pub files: Vec<FileDiff>,
    /// Whether the original text ended with a newline. Computed diffs set
    /// this to true.
    pub trailing_newline: bool,
    /// Set when the input contained invalid UTF-8 that was replaced.
    pub lossy_decoded: bool,
}

/// One line of the flattened document view of a diff, used for token
/// accounting and truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentLine {
    pub class: LineClass,
    /// Content without the one-character diff marker.
    pub text: String,
    /// Rendered form including the marker, as it appears in diff text.
    pub rendered: String,
    /// Index of the file this line belongs to, when any.
    pub file: Option<usize>,
}

impl CommitDiff {
    /// Flatten the diff into its document line sequence: message lines,
    /// preamble, then per file the header lines, hunk headers, and hunk
    /// bodies.
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
        for line in &self.preamble {
            out.push(DocumentLine {
                class: LineClass::Header,
                text: line.clone(),
                rendered: line.clone(),
                file: None,
            });
        }
        for (fi, file) in self.files.iter().enumerate() {
            for line in &file.headers {
                out.push(DocumentLine {
                    class: LineClass::Header,
                    text: line.clone(),
                    rendered: line.clone(),
                    file: Some(fi),
                });
            }
            for hunk in &file.hunks {
                let header = hunk.header_line();
                out.push(DocumentLine {
                    class: LineClass::Header,
                    text: header.clone(),
                    rendered: header,
                    file: Some(fi),
                });
                for line in &hunk.lines {
                    let (class, marker) = match line.kind {
                        LineKind::Added => (LineClass::Change, "+"),
                        LineKind::Deleted => (LineClass::Change, "-"),
                        LineKind::Context => (LineClass::Context, " "),
                        // Marker lines inside hunks (`\ No newline ...`).
                        LineKind::Header | LineKind::Message => (LineClass::Header, ""),
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
        out
    }
}

/// Count tokens per line class over the document view of `diff`.
///
/// The four class counts partition the total: their sum equals the token
/// count of the whole document.
pub fn classify_token_budget(diff: &CommitDiff, tokenizer: &Tokenizer) -> TokenClassCounts {
    crate::budget::count_classes(&diff.document_lines(), tokenizer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Tokenizer;

    #[test]
    fn hunk_header_formatting_omits_count_one() {
        let h = Hunk {
            old_start: 5,
            old_count: 1,
            new_start: 5,
            new_count: 2,
            section: String::new(),
            lines: vec![],
        };
        assert_eq!(h.header_line(), "@@ -5 +5,2 @@");
    }

    #[test]
    fn hunk_header_keeps_section_text() {
        let h = Hunk {
            old_start: 1,
            old_count: 3,
            new_start: 1,
            new_count: 3,
            section: "int main()".to_string(),
            lines: vec![],
        };
        assert_eq!(h.header_line(), "@@ -1,3 +1,3 @@ int main()");
    }

    #[test]
    fn empty_diff_classifies_to_zero() {
        let counts = classify_token_budget(&CommitDiff::default(), &Tokenizer::builtin());
        assert_eq!(counts.total(), 0);
    }

    #[test]
    fn message_only_diff_counts_message_tokens() {
        let diff = CommitDiff {
            message: Some("fix overflow".to_string()),
            ..CommitDiff::default()
        };
        let counts = classify_token_budget(&diff, &Tokenizer::builtin());
        assert!(counts.message > 0);
        assert_eq!(counts.change, 0);
        assert_eq!(counts.header, 0);
        assert_eq!(counts.context, 0);
    }

    #[test]
    fn change_and_context_tokens_partition_total() {
        let hunk = Hunk {
            old_start: 1,
            old_count: 1,
            new_start: 1,
            new_count: 2,
            section: String::new(),
            lines: vec![
                DiffLine::context("int y;", 1, 1),
                DiffLine::added("x=1;", 2),
            ],
        };
        let diff = CommitDiff {
            files: vec![FileDiff {
                old_path: "a.c".into(),
                new_path: "a.c".into(),
                hunks: vec![hunk],
                ..FileDiff::default()
            }],
            trailing_newline: true,
            ..CommitDiff::default()
        };
        let tok = Tokenizer::builtin();
        let counts = classify_token_budget(&diff, &tok);
        // "x=1;" -> x, =, 1, ;
        assert_eq!(counts.change, 4);
        // "int y;" -> int, y, ;
        assert_eq!(counts.context, 3);
        // hunk header line
        assert!(counts.header > 0);
        assert_eq!(
            counts.total(),
            counts.change + counts.header + counts.context + counts.message
        );
    }
}
