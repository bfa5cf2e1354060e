//! Rendering of [`CommitDiff`] values back to unified diff text.

use thiserror::Error;

use super::{CommitDiff, FileDiff, LineKind};

/// Rendering failure caused by an invariant violation in the model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error(
        "hunk {hunk_index} of {path:?} declares -{old_count}/+{new_count} \
         but its body holds -{body_old}/+{body_new}"
    )]
    CountMismatch {
        path: String,
        hunk_index: usize,
        old_count: u32,
        new_count: u32,
        body_old: u32,
        body_new: u32,
    },
    #[error("binary file diff {path:?} carries {hunks} hunks")]
    BinaryWithHunks { path: String, hunks: usize },
}

/// Render a diff to unified text. Byte-exact inverse of parsing on
/// canonical git output; hunk header lines are recomputed from the stored
/// counts. The commit message is not part of the rendered diff text.
pub fn render_unified_diff(diff: &CommitDiff) -> Result<String, RenderError> {
    for file in &diff.files {
        validate_file(file)?;
    }
    let mut lines: Vec<String> = Vec::new();
    lines.extend(diff.preamble.iter().cloned());
    for file in &diff.files {
        lines.extend(file.headers.iter().cloned());
        for hunk in &file.hunks {
            lines.push(hunk.header_line());
            for line in &hunk.lines {
                lines.push(match line.kind {
                    LineKind::Added => format!("+{}", line.text),
                    LineKind::Deleted => format!("-{}", line.text),
                    LineKind::Context => format!(" {}", line.text),
                    LineKind::Header | LineKind::Message => line.text.clone(),
                });
            }
        }
    }
    let mut out = lines.join("\n");
    if !lines.is_empty() && diff.trailing_newline {
        out.push('\n');
    }
    Ok(out)
}

fn validate_file(file: &FileDiff) -> Result<(), RenderError> {
    let path = if file.new_path.is_empty() {
        file.old_path.clone()
    } else {
        file.new_path.clone()
    };
    if file.is_binary && !file.hunks.is_empty() {
        return Err(RenderError::BinaryWithHunks {
            path,
            hunks: file.hunks.len(),
        });
    }
    for (i, hunk) in file.hunks.iter().enumerate() {
        if !hunk.counts_consistent() {
            return Err(RenderError::CountMismatch {
                path,
                hunk_index: i,
                old_count: hunk.old_count,
                new_count: hunk.new_count,
                body_old: hunk.body_old_count(),
                body_new: hunk.body_new_count(),
            });
        }
    }
    Ok(())
}
