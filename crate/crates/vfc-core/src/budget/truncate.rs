//! Token-budget truncation strategies.
//!
//! Context-aware truncation removes context lines in order of decreasing
//! line distance from the nearest code change, then headers, then message
//! lines; changed lines are removed last, so the security-relevant signal
//! survives as long as the budget allows. Naive truncation keeps the first
//! `limit` tokens in rendering order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{count_classes, LineClass, TokenClassCounts, Tokenizer};
use crate::diff::DocumentLine;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TruncationError {
    #[error("token limit must be at least 1 (got {0})")]
    InvalidLimit(usize),
}

/// What truncation removed from a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub limit: usize,
    pub removed: TokenClassCounts,
    /// Change tokens removed / change tokens present (0 when no change
    /// tokens were present).
    pub discarded_change_fraction: f64,
    pub affected: bool,
}

impl TruncationReport {
    fn from_counts(limit: usize, before: TokenClassCounts, after: TokenClassCounts) -> Self {
        let removed = TokenClassCounts {
            change: before.change - after.change,
            header: before.header - after.header,
            context: before.context - after.context,
            message: before.message - after.message,
        };
        let discarded_change_fraction = if before.change == 0 {
            0.0
        } else {
            removed.change as f64 / before.change as f64
        };
        TruncationReport {
            limit,
            removed,
            discarded_change_fraction,
            affected: removed.change + removed.header + removed.context + removed.message > 0,
        }
    }
}

/// Truncate by removing the context line whose line distance to the
/// nearest changed line in the same file is maximal, farthest first (files
/// without changes rank as infinitely far); ties remove the later line.
/// When all context is gone, header lines are removed (later first), then
/// message lines, and finally the changed lines themselves are
/// tail-truncated.
pub fn truncate_context_aware(
    lines: &[DocumentLine],
    limit: usize,
    tokenizer: &Tokenizer,
) -> Result<(Vec<DocumentLine>, TruncationReport), TruncationError> {
    if limit == 0 {
        return Err(TruncationError::InvalidLimit(limit));
    }
    let before = count_classes(lines, tokenizer);
    if before.total() <= limit {
        let report = TruncationReport::from_counts(limit, before, before);
        return Ok((lines.to_vec(), report));
    }

    let tokens: Vec<usize> = lines.iter().map(|l| tokenizer.count(&l.text)).collect();
    let mut total = before.total();
    let mut removed = vec![false; lines.len()];

    // Distances are computed once against the original layout.
    let distances = change_distances(lines);
    let mut context_order: Vec<usize> = (0..lines.len())
        .filter(|&i| lines[i].class == LineClass::Context)
        .collect();
    context_order.sort_by(|&a, &b| {
        distances[b]
            .cmp(&distances[a])
            .then_with(|| b.cmp(&a))
    });

    for &i in &context_order {
        if total <= limit {
            break;
        }
        removed[i] = true;
        total -= tokens[i];
    }
    for class in [LineClass::Header, LineClass::Message] {
        if total <= limit {
            break;
        }
        for i in (0..lines.len()).rev() {
            if total <= limit {
                break;
            }
            if lines[i].class == class && !removed[i] {
                removed[i] = true;
                total -= tokens[i];
            }
        }
    }

    let mut kept: Vec<DocumentLine> = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if !removed[i] {
            kept.push(line.clone());
        }
    }
    if total > limit {
        // Only changed lines remain: keep their leading `limit` tokens.
        kept = tail_truncate(&kept, limit, tokenizer);
    }
    let after = count_classes(&kept, tokenizer);
    let report = TruncationReport::from_counts(limit, before, after);
    Ok((kept, report))
}

/// Keep the first `limit` tokens of the document in rendering order.
pub fn truncate_naive(
    lines: &[DocumentLine],
    limit: usize,
    tokenizer: &Tokenizer,
) -> Result<(Vec<DocumentLine>, TruncationReport), TruncationError> {
    if limit == 0 {
        return Err(TruncationError::InvalidLimit(limit));
    }
    let before = count_classes(lines, tokenizer);
    if before.total() <= limit {
        let report = TruncationReport::from_counts(limit, before, before);
        return Ok((lines.to_vec(), report));
    }
    let mut kept = Vec::new();
    let mut used = 0usize;
    for line in lines {
        let n = tokenizer.count(&line.text);
        if used + n <= limit {
            kept.push(line.clone());
            used += n;
        } else {
            let remaining = limit - used;
            if remaining > 0 {
                kept.push(cut_line(line, remaining, tokenizer));
            }
            break;
        }
    }
    let after = count_classes(&kept, tokenizer);
    let report = TruncationReport::from_counts(limit, before, after);
    Ok((kept, report))
}

/// Line distance from each line to the nearest changed line of the same
/// file; `usize::MAX` when the file holds no changes or the line is not
/// part of a file block.
fn change_distances(lines: &[DocumentLine]) -> Vec<usize> {
    let mut change_positions: Vec<Vec<usize>> = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.class == LineClass::Change {
            if let Some(f) = line.file {
                if change_positions.len() <= f {
                    change_positions.resize(f + 1, Vec::new());
                }
                change_positions[f].push(i);
            }
        }
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| match line.file {
            Some(f) => change_positions
                .get(f)
                .into_iter()
                .flatten()
                .map(|&j| i.abs_diff(j))
                .min()
                .unwrap_or(usize::MAX),
            None => usize::MAX,
        })
        .collect()
}

fn tail_truncate(lines: &[DocumentLine], limit: usize, tokenizer: &Tokenizer) -> Vec<DocumentLine> {
    let mut kept = Vec::new();
    let mut used = 0usize;
    for line in lines {
        let n = tokenizer.count(&line.text);
        if used + n <= limit {
            kept.push(line.clone());
            used += n;
        } else {
            let remaining = limit - used;
            if remaining > 0 {
                kept.push(cut_line(line, remaining, tokenizer));
            }
            break;
        }
    }
    kept
}

/// Keep the first `keep_tokens` tokens of a line, preserving the original
/// spacing up to the cut point and the rendering marker.
fn cut_line(line: &DocumentLine, keep_tokens: usize, tokenizer: &Tokenizer) -> DocumentLine {
    let spans = tokenizer.token_spans(&line.text);
    debug_assert!(keep_tokens < spans.len());
    let end = spans[keep_tokens - 1].1;
    let text: String = line.text[..end].to_string();
    let marker_len = line.rendered.len() - line.text.len();
    let rendered = format!("{}{}", &line.rendered[..marker_len], text);
    DocumentLine {
        class: line.class,
        text,
        rendered,
        file: line.file,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc_line(class: LineClass, text: &str, file: Option<usize>) -> DocumentLine {
        let marker = match class {
            LineClass::Change => "+",
            LineClass::Context => " ",
            _ => "",
        };
        DocumentLine {
            class,
            text: text.to_string(),
            rendered: format!("{marker}{text}"),
            file,
        }
    }

    fn tok() -> Tokenizer {
        Tokenizer::builtin()
    }

    #[test]
    fn under_limit_is_untouched() {
        let lines = vec![doc_line(LineClass::Change, "x = 1 ;", Some(0))];
        let (out, report) = truncate_context_aware(&lines, 100, &tok()).unwrap();
        assert_eq!(out, lines);
        assert!(!report.affected);
        assert_eq!(report.discarded_change_fraction, 0.0);
    }

    #[test]
    fn zero_limit_rejected() {
        let lines = vec![doc_line(LineClass::Change, "x", Some(0))];
        assert!(matches!(
            truncate_naive(&lines, 0, &tok()),
            Err(TruncationError::InvalidLimit(0))
        ));
        assert!(truncate_context_aware(&lines, 0, &tok()).is_err());
    }

    #[test]
    fn farthest_context_lines_go_first() {
        // 10 one-token context lines around one change; limit 7 forces 4
        // removals. Hand oracle: distances are 5,4,3,2,1,(chg),1,2,3,4,5;
        // removal order is idx10 (d=5, later), idx0 (d=5), idx9 (d=4),
        // idx1 (d=4).
        let mut lines = Vec::new();
        for i in 0..5 {
            lines.push(doc_line(LineClass::Context, &format!("c{i}"), Some(0)));
        }
        lines.push(doc_line(LineClass::Change, "chg", Some(0)));
        for i in 5..10 {
            lines.push(doc_line(LineClass::Context, &format!("c{i}"), Some(0)));
        }
        let (out, report) = truncate_context_aware(&lines, 7, &tok()).unwrap();
        let kept_texts: Vec<&str> = out.iter().map(|l| l.text.as_str()).collect();
        assert_eq!(kept_texts, vec!["c2", "c3", "c4", "chg", "c5", "c6", "c7"]);
        assert!(report.affected);
        assert_eq!(report.removed.context, 4);
        assert_eq!(report.removed.change, 0);
    }

    #[test]
    fn changes_at_tail_survive_context_aware_but_not_naive() {
        let mut lines: Vec<DocumentLine> = (0..20)
            .map(|i| doc_line(LineClass::Context, &format!("ctx{i}"), Some(0)))
            .collect();
        lines.push(doc_line(LineClass::Change, "fix", Some(0)));
        let (_, ca) = truncate_context_aware(&lines, 5, &tok()).unwrap();
        let (_, naive) = truncate_naive(&lines, 5, &tok()).unwrap();
        assert_eq!(ca.discarded_change_fraction, 0.0);
        assert_eq!(naive.discarded_change_fraction, 1.0);
    }

    #[test]
    fn unchanged_file_context_ranks_farthest() {
        let lines = vec![
            doc_line(LineClass::Context, "near", Some(0)),
            doc_line(LineClass::Change, "chg", Some(0)),
            doc_line(LineClass::Context, "other file", Some(1)),
        ];
        let (out, _) = truncate_context_aware(&lines, 3, &tok()).unwrap();
        // "other file" is 2 tokens; removing it alone meets the limit.
        assert!(out.iter().all(|l| l.file != Some(1)));
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn change_lines_prefix_kept_when_limit_below_change_tokens() {
        let lines = vec![
            doc_line(LineClass::Header, "--- a/x", Some(0)),
            doc_line(LineClass::Change, "a b c d", Some(0)),
            doc_line(LineClass::Change, "e f g h", Some(0)),
        ];
        let (out, report) = truncate_context_aware(&lines, 6, &tok()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].text, "a b c d");
        assert_eq!(out[1].text, "e f");
        assert_eq!(out[1].rendered, "+e f");
        let after = count_classes(&out, &tok());
        assert_eq!(after.total(), 6);
        assert!(report.discarded_change_fraction > 0.0);
    }

    #[test]
    fn naive_keeps_leading_tokens_and_cuts_midline() {
        let lines = vec![
            doc_line(LineClass::Message, "one two three", None),
            doc_line(LineClass::Change, "x = 1 ;", Some(0)),
        ];
        let (out, report) = truncate_naive(&lines, 4, &tok()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].text, "one two three");
        assert_eq!(out[1].text, "x");
        assert!(report.affected);
        assert_eq!(report.removed.change, 3);
    }
}
