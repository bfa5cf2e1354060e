//! Grammar-based comment removal.
//!
//! Comment nodes are located on the concrete syntax tree, so comment-like
//! patterns inside string literals are left alone. Lines left fully blank
//! by the removal are deleted; a removal at the end of a line also drops
//! the whitespace that separated the code from the comment.

use super::{parse_source, Language, SyntaxError};

/// Strip comments from both versions of a file. The caller regenerates the
/// diff afterwards.
pub fn strip_comments(
    pre: &str,
    post: &str,
    language: Language,
) -> Result<(String, String), SyntaxError> {
    Ok((
        strip_comments_one(pre, language)?,
        strip_comments_one(post, language)?,
    ))
}

/// Strip comments from a single file version.
pub fn strip_comments_one(text: &str, language: Language) -> Result<String, SyntaxError> {
    let tree = parse_source(text, language)?;
    let mut ranges: Vec<(usize, usize)> = tree
        .pre_order()
        .filter(|&n| tree.kind(n) == "comment")
        .map(|n| {
            let r = tree.byte_range(n);
            (r.start, r.end)
        })
        .collect();
    if ranges.is_empty() {
        return Ok(text.to_string());
    }
    ranges.sort_unstable();

    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut line_start = 0usize;
    while line_start < bytes.len() {
        let line_end = bytes[line_start..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| line_start + p)
            .unwrap_or(bytes.len());
        let has_newline = line_end < bytes.len();

        // Collect the line's bytes that fall outside every comment range.
        let mut kept = String::new();
        let mut removed_any = false;
        let mut pos = line_start;
        for &(cs, ce) in &ranges {
            if ce <= line_start {
                continue;
            }
            if cs >= line_end {
                break;
            }
            removed_any = true;
            if cs > pos {
                kept.push_str(&text[pos..cs]);
            }
            pos = ce.min(line_end).max(pos);
        }
        if pos < line_end {
            kept.push_str(&text[pos..line_end]);
        }

        if removed_any {
            let trimmed = kept.trim_end();
            if !trimmed.is_empty() {
                out.push_str(trimmed);
                if has_newline {
                    out.push('\n');
                }
            }
            // A line emptied by comment removal is dropped entirely.
        } else {
            out.push_str(&text[line_start..line_end]);
            if has_newline {
                out.push('\n');
            }
        }
        line_start = line_end + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comment_free_input_is_unchanged() {
        let src = "int x;\nint y;\n";
        assert_eq!(strip_comments_one(src, Language::C).unwrap(), src);
    }

    #[test]
    fn trailing_line_comment_removed_with_separating_space() {
        assert_eq!(
            strip_comments_one("int x; // c\n", Language::C).unwrap(),
            "int x;\n"
        );
    }

    #[test]
    fn comment_only_lines_are_deleted() {
        let src = "int a;\n// gone\nint b;\n";
        assert_eq!(strip_comments_one(src, Language::C).unwrap(), "int a;\nint b;\n");
    }

    #[test]
    fn block_comment_spanning_lines_is_deleted() {
        let src = "int a;\n/* one\n   two */\nint b;\n";
        assert_eq!(strip_comments_one(src, Language::C).unwrap(), "int a;\nint b;\n");
    }

    #[test]
    fn block_comment_with_trailing_code_keeps_the_code() {
        let src = "/* c */ int a;\n";
        assert_eq!(strip_comments_one(src, Language::C).unwrap(), " int a;\n");
    }

    #[test]
    fn string_literals_are_untouched() {
        let src = "char*s=\"//not a comment\";\n";
        assert_eq!(strip_comments_one(src, Language::C).unwrap(), src);
    }

    #[test]
    fn stripping_is_idempotent() {
        let src = "int a; /* x */\n// y\nchar *s = \"/* keep */\"; // tail\nint b;\n";
        let once = strip_comments_one(src, Language::C).unwrap();
        let twice = strip_comments_one(&once, Language::C).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn non_comment_code_bytes_survive() {
        let src = "int a = 1; // c\nint bb = 2; /* mid */ int cc = 3;\n";
        let stripped = strip_comments_one(src, Language::C).unwrap();
        let squash = |s: &str| s.split_whitespace().collect::<String>();
        let code_only = "inta=1;intbb=2;intcc=3;";
        assert_eq!(squash(&stripped), code_only);
    }

    #[test]
    fn both_sides_stripped() {
        let (p, t) = strip_comments("int a; // x\n", "int a; // y\nint b;\n", Language::C).unwrap();
        assert_eq!(p, "int a;\n");
        assert_eq!(t, "int a;\nint b;\n");
    }
}
