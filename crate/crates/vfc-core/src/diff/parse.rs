//! Parser for git-flavored unified diff text.

use thiserror::Error;

use super::{CommitDiff, DiffLine, FileDiff, Hunk};

/// Structured parse failure, pointing at the 1-based input line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// Parse unified diff text into a [`CommitDiff`].
///
/// Every input line is assigned to exactly one place in the model: hunk
/// bodies become `Added`/`Deleted`/`Context` lines with line numbers
/// computed from the hunk headers, and everything else (file headers, mode
/// and rename markers, binary markers, `\ No newline` markers) is kept
/// verbatim as `Header` content. An optional commit `message` is attached
/// as-is. Inputs whose hunk headers disagree with the body are rejected.
pub fn parse_unified_diff(text: &str, message: Option<&str>) -> Result<CommitDiff, ParseError> {
    let mut diff = parse_inner(text)?;
    diff.message = message.map(|m| m.to_string());
    Ok(diff)
}

/// Variant of [`parse_unified_diff`] for raw bytes. Invalid UTF-8 sequences
/// are replaced with U+FFFD and the result is flagged `lossy_decoded`.
pub fn parse_unified_diff_bytes(
    bytes: &[u8],
    message: Option<&str>,
) -> Result<CommitDiff, ParseError> {
    let decoded = String::from_utf8_lossy(bytes);
    let lossy = matches!(decoded, std::borrow::Cow::Owned(_));
    let mut diff = parse_unified_diff(&decoded, message)?;
    diff.lossy_decoded = lossy;
    Ok(diff)
}

struct FileBuilder {
    file: FileDiff,
}

impl FileBuilder {
    fn new() -> Self {
        FileBuilder {
            file: FileDiff::default(),
        }
    }

    fn push_header(&mut self, line: &str) {
        if let Some(rest) = line.strip_prefix("diff --git ") {
            if let Some((old, new)) = split_git_paths(rest) {
                if self.file.old_path.is_empty() {
                    self.file.old_path = old;
                }
                if self.file.new_path.is_empty() {
                    self.file.new_path = new;
                }
            }
        } else if let Some(rest) = line.strip_prefix("--- ") {
            self.file.old_path = clean_path(rest);
        } else if let Some(rest) = line.strip_prefix("+++ ") {
            self.file.new_path = clean_path(rest);
        } else if line.starts_with("Binary files ") && line.ends_with(" differ")
            || line == "GIT binary patch"
        {
            self.file.is_binary = true;
        }
        self.file.headers.push(line.to_string());
    }
}

fn split_git_paths(rest: &str) -> Option<(String, String)> {
    // `diff --git a/old b/new`; paths containing spaces are split on the
    // last ` b/` occurrence.
    if !rest.starts_with("a/") {
        return None;
    }
    let pos = rest.rfind(" b/")?;
    Some((rest[2..pos].to_string(), rest[pos + 3..].to_string()))
}

fn clean_path(raw: &str) -> String {
    let no_ts = raw.split('\t').next().unwrap_or(raw);
    if no_ts == "/dev/null" {
        return no_ts.to_string();
    }
    no_ts
        .strip_prefix("a/")
        .or_else(|| no_ts.strip_prefix("b/"))
        .unwrap_or(no_ts)
        .to_string()
}

fn is_file_start(lines: &[&str], i: usize) -> bool {
    let l = lines[i];
    l.starts_with("diff --git ")
        || (l.starts_with("Binary files ") && l.ends_with(" differ"))
        || (l.starts_with("--- ") && lines.get(i + 1).is_some_and(|n| n.starts_with("+++ ")))
}

fn parse_hunk_header(line: &str, lineno: usize) -> Result<Hunk, ParseError> {
    let err = || ParseError::new(lineno, format!("malformed hunk header: {line:?}"));
    let rest = line.strip_prefix("@@ -").ok_or_else(err)?;
    let (old_part, rest) = rest.split_once(" +").ok_or_else(err)?;
    let (new_part, tail) = rest.split_once(" @@").ok_or_else(err)?;
    let parse_side = |part: &str| -> Result<(u32, u32), ParseError> {
        match part.split_once(',') {
            Some((s, c)) => Ok((
                s.parse().map_err(|_| err())?,
                c.parse().map_err(|_| err())?,
            )),
            None => Ok((part.parse().map_err(|_| err())?, 1)),
        }
    };
    let (old_start, old_count) = parse_side(old_part)?;
    let (new_start, new_count) = parse_side(new_part)?;
    let section = tail.strip_prefix(' ').unwrap_or(tail).to_string();
    Ok(Hunk {
        old_start,
        old_count,
        new_start,
        new_count,
        section,
        lines: Vec::new(),
    })
}

fn parse_inner(text: &str) -> Result<CommitDiff, ParseError> {
    let mut diff = CommitDiff::default();
    if text.is_empty() {
        return Ok(diff);
    }
    diff.trailing_newline = text.ends_with('\n');
    let mut lines: Vec<&str> = text.split('\n').collect();
    if diff.trailing_newline {
        lines.pop();
    }

    let mut cur: Option<FileBuilder> = None;
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        let lineno = i + 1;

        if line.starts_with("@@ -") {
            let mut hunk = parse_hunk_header(line, lineno)?;
            i += 1;
            let mut old_rem = hunk.old_count;
            let mut new_rem = hunk.new_count;
            let mut old_ln = hunk.old_start;
            let mut new_ln = hunk.new_start;
            while old_rem > 0 || new_rem > 0 {
                let Some(&body) = lines.get(i) else {
                    return Err(ParseError::new(
                        lines.len(),
                        "hunk body ended before declared counts were met",
                    ));
                };
                let body_lineno = i + 1;
                if let Some(text) = body.strip_prefix('+') {
                    if new_rem == 0 {
                        return Err(ParseError::new(
                            body_lineno,
                            "hunk header counts inconsistent with body (extra added line)",
                        ));
                    }
                    hunk.lines.push(DiffLine::added(text, new_ln));
                    new_ln += 1;
                    new_rem -= 1;
                } else if let Some(text) = body.strip_prefix('-') {
                    if old_rem == 0 {
                        return Err(ParseError::new(
                            body_lineno,
                            "hunk header counts inconsistent with body (extra deleted line)",
                        ));
                    }
                    hunk.lines.push(DiffLine::deleted(text, old_ln));
                    old_ln += 1;
                    old_rem -= 1;
                } else if body.starts_with('\\') {
                    hunk.lines.push(DiffLine::marker(body));
                } else if body.is_empty() || body.starts_with(' ') {
                    if old_rem == 0 || new_rem == 0 {
                        return Err(ParseError::new(
                            body_lineno,
                            "hunk header counts inconsistent with body (extra context line)",
                        ));
                    }
                    let text = body.strip_prefix(' ').unwrap_or(body);
                    hunk.lines.push(DiffLine::context(text, old_ln, new_ln));
                    old_ln += 1;
                    new_ln += 1;
                    old_rem -= 1;
                    new_rem -= 1;
                } else {
                    return Err(ParseError::new(
                        body_lineno,
                        format!("hunk body ended before declared counts were met: {body:?}"),
                    ));
                }
                i += 1;
            }
            // Trailing no-newline marker for the final line of the hunk.
            if let Some(&next) = lines.get(i) {
                if next.starts_with('\\') {
                    hunk.lines.push(DiffLine::marker(next));
                    i += 1;
                }
            }
            let fb = cur.get_or_insert_with(FileBuilder::new);
            fb.file.hunks.push(hunk);
            continue;
        }

        match &mut cur {
            None => {
                if is_file_start(&lines, i) {
                    let mut fb = FileBuilder::new();
                    fb.push_header(line);
                    cur = Some(fb);
                } else {
                    diff.preamble.push(line.to_string());
                }
            }
            Some(fb) => {
                if fb.file.hunks.is_empty() && !line.starts_with("diff --git ") {
                    // Still collecting this file's header block.
                    fb.push_header(line);
                } else if is_file_start(&lines, i) {
                    // A bare `---`/`+++` pair or git header opens the next
                    // file section.
                    let done = cur.take().expect("file in progress");
                    diff.files.push(done.file);
                    let mut fb = FileBuilder::new();
                    fb.push_header(line);
                    cur = Some(fb);
                } else if line.starts_with('+')
                    || line.starts_with('-')
                    || line.starts_with(' ')
                    || line.starts_with('\\')
                {
                    return Err(ParseError::new(
                        lineno,
                        "hunk header counts inconsistent with body (body continues past counts)",
                    ));
                } else {
                    // A new file section begins (git header, bare ---/+++
                    // pair, or an unknown marker kept as header text).
                    let done = cur.take().expect("file in progress");
                    diff.files.push(done.file);
                    let mut fb = FileBuilder::new();
                    fb.push_header(line);
                    cur = Some(fb);
                }
            }
        }
        i += 1;
    }
    if let Some(fb) = cur {
        diff.files.push(fb.file);
    }
    Ok(diff)
}
