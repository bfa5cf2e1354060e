//! Shortest-edit-script line diff and unified hunk assembly.

use std::collections::HashMap;

use super::{DiffLine, FileDiff, Hunk};

/// One step of the line edit script between two files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineEdit {
    /// Line `old` equals line `new`.
    Keep { old: usize, new: usize },
    /// Line `old` of the old file was removed.
    Delete { old: usize },
    /// Line `new` of the new file was inserted.
    Insert { new: usize },
}

/// Compute a shortest edit script between two line sequences (Myers
/// greedy O(ND)). Lines are interned so comparisons are O(1).
pub fn diff_lines<'a>(old: &[&'a str], new: &[&'a str]) -> Vec<LineEdit> {
    fn assign<'a>(intern: &mut HashMap<&'a str, u32>, s: &'a str) -> u32 {
        let next = intern.len() as u32;
        *intern.entry(s).or_insert(next)
    }
    let mut intern: HashMap<&'a str, u32> = HashMap::new();
    let a: Vec<u32> = old.iter().map(|s| assign(&mut intern, s)).collect();
    let b: Vec<u32> = new.iter().map(|s| assign(&mut intern, s)).collect();
    myers(&a, &b)
}

fn myers(a: &[u32], b: &[u32]) -> Vec<LineEdit> {
    let n = a.len() as isize;
    let m = b.len() as isize;
    let max = n + m;
    if max == 0 {
        return Vec::new();
    }
    let offset = max;
    // v[k + offset] = furthest x on diagonal k; trace keeps snapshots for
    // backtracking.
    let mut v = vec![0isize; (2 * max + 1) as usize];
    let mut trace: Vec<Vec<isize>> = Vec::new();
    let mut found_d = None;
    'outer: for d in 0..=max {
        trace.push(v.clone());
        let mut k = -d;
        while k <= d {
            let idx = (k + offset) as usize;
            let mut x = if k == -d || (k != d && v[idx - 1] < v[idx + 1]) {
                v[idx + 1]
            } else {
                v[idx - 1] + 1
            };
            let mut y = x - k;
            while x < n && y < m && a[x as usize] == b[y as usize] {
                x += 1;
                y += 1;
            }
            v[idx] = x;
            if x >= n && y >= m {
                found_d = Some(d);
                break 'outer;
            }
            k += 2;
        }
    }
    let d_final = found_d.expect("Myers search always terminates at d = n + m");

    // Backtrack from (n, m) through the snapshots.
    let mut edits = Vec::new();
    let mut x = n;
    let mut y = m;
    for d in (1..=d_final).rev() {
        let v = &trace[d as usize];
        let k = x - y;
        let idx = (k + offset) as usize;
        let down = k == -d || (k != d && v[idx - 1] < v[idx + 1]);
        let prev_k = if down { k + 1 } else { k - 1 };
        let prev_x = v[(prev_k + offset) as usize];
        let prev_y = prev_x - prev_k;
        // Snake back through matching lines.
        while x > prev_x && y > prev_y {
            x -= 1;
            y -= 1;
            edits.push(LineEdit::Keep {
                old: x as usize,
                new: y as usize,
            });
        }
        if down {
            y -= 1;
            edits.push(LineEdit::Insert { new: y as usize });
        } else {
            x -= 1;
            edits.push(LineEdit::Delete { old: x as usize });
        }
    }
    // Leading snake at d = 0.
    while x > 0 && y > 0 {
        x -= 1;
        y -= 1;
        edits.push(LineEdit::Keep {
            old: x as usize,
            new: y as usize,
        });
    }
    edits.reverse();
    edits
}

/// Split text into lines for diffing. A trailing newline does not create a
/// final empty line.
pub(crate) fn split_lines(text: &str) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    let mut lines: Vec<&str> = text.split('\n').collect();
    if text.ends_with('\n') {
        lines.pop();
    }
    lines
}

const NO_NEWLINE_MARKER: &str = "\\ No newline at end of file";

/// Regenerate a unified diff between two file versions with `context_n`
/// surrounding context lines. Applying the result to `pre` reproduces
/// `post` exactly, including trailing-newline state.
pub fn compute_unified_diff(pre: &str, post: &str, context_n: usize) -> FileDiff {
    compute_unified_diff_with_paths(pre, post, context_n, "a", "b")
}

/// Like [`compute_unified_diff`] but with explicit `old_path`/`new_path`
/// used for the synthesized `---`/`+++` headers.
pub fn compute_unified_diff_with_paths(
    pre: &str,
    post: &str,
    context_n: usize,
    old_path: &str,
    new_path: &str,
) -> FileDiff {
    let old_lines = split_lines(pre);
    let new_lines = split_lines(post);
    let edits = diff_lines(&old_lines, &new_lines);

    let pre_no_nl = !pre.is_empty() && !pre.ends_with('\n');
    let post_no_nl = !post.is_empty() && !post.ends_with('\n');

    let mut file = FileDiff {
        old_path: old_path.to_string(),
        new_path: new_path.to_string(),
        is_binary: false,
        headers: vec![format!("--- a/{old_path}"), format!("+++ b/{new_path}")],
        hunks: Vec::new(),
    };
    // A kept line whose "unterminated" status differs between the two
    // sides must be rewritten inside a hunk, exactly like a changed line.
    let needs_rewrite = |old: usize, new: usize| {
        let old_unterminated = old + 1 == old_lines.len() && pre_no_nl;
        let new_unterminated = new + 1 == new_lines.len() && post_no_nl;
        old_unterminated != new_unterminated
    };
    let forced: Vec<usize> = edits
        .iter()
        .enumerate()
        .filter(|(_, e)| match **e {
            LineEdit::Keep { old, new } => needs_rewrite(old, new),
            _ => true,
        })
        .map(|(i, _)| i)
        .collect();
    if forced.is_empty() {
        return file;
    }

    // Group forced positions into hunks: each with up to context_n
    // surrounding context lines; overlapping or adjacent groups merge.
    let mut ranges: Vec<(usize, usize)> = Vec::new();
    let mut start = forced[0].saturating_sub(context_n);
    let mut end = (forced[0] + context_n).min(edits.len() - 1);
    for &c in &forced[1..] {
        let c_start = c.saturating_sub(context_n);
        if c_start <= end + 1 {
            end = (c + context_n).min(edits.len() - 1);
        } else {
            ranges.push((start, end));
            start = c_start;
            end = (c + context_n).min(edits.len() - 1);
        }
    }
    ranges.push((start, end));

    for (start, end) in ranges {
        let slice = &edits[start..=end];
        let mut hunk = Hunk::default();
        let mut first_old: Option<usize> = None;
        let mut first_new: Option<usize> = None;
        for e in slice {
            match *e {
                LineEdit::Keep { old, new } => {
                    first_old.get_or_insert(old);
                    first_new.get_or_insert(new);
                    let old_unterminated = old + 1 == old_lines.len() && pre_no_nl;
                    let new_unterminated = new + 1 == new_lines.len() && post_no_nl;
                    if old_unterminated != new_unterminated {
                        // Only the trailing newline differs: the line is
                        // rewritten, as git does.
                        hunk.lines
                            .push(DiffLine::deleted(old_lines[old], old as u32 + 1));
                        if old_unterminated {
                            hunk.lines.push(DiffLine::marker(NO_NEWLINE_MARKER));
                        }
                        hunk.lines
                            .push(DiffLine::added(new_lines[new], new as u32 + 1));
                        if new_unterminated {
                            hunk.lines.push(DiffLine::marker(NO_NEWLINE_MARKER));
                        }
                        continue;
                    }
                    hunk.lines.push(DiffLine::context(
                        old_lines[old],
                        old as u32 + 1,
                        new as u32 + 1,
                    ));
                    if old_unterminated {
                        // Both sides end without newline on a shared line.
                        hunk.lines.push(DiffLine::marker(NO_NEWLINE_MARKER));
                    }
                }
                LineEdit::Delete { old } => {
                    first_old.get_or_insert(old);
                    hunk.lines
                        .push(DiffLine::deleted(old_lines[old], old as u32 + 1));
                    if old + 1 == old_lines.len() && pre_no_nl {
                        hunk.lines.push(DiffLine::marker(NO_NEWLINE_MARKER));
                    }
                }
                LineEdit::Insert { new } => {
                    first_new.get_or_insert(new);
                    hunk.lines
                        .push(DiffLine::added(new_lines[new], new as u32 + 1));
                    if new + 1 == new_lines.len() && post_no_nl {
                        hunk.lines.push(DiffLine::marker(NO_NEWLINE_MARKER));
                    }
                }
            }
        }
        hunk.old_count = hunk.body_old_count();
        hunk.new_count = hunk.body_new_count();
        // Start lines are 1-based; a side with no lines in the hunk reports
        // the last line consumed before it, matching git (0 at file start).
        hunk.old_start = match first_old {
            Some(o) => o as u32 + 1,
            None => old_anchor_before(&edits, start),
        };
        hunk.new_start = match first_new {
            Some(n) => n as u32 + 1,
            None => new_anchor_before(&edits, start),
        };
        file.hunks.push(hunk);
    }
    file
}

fn old_anchor_before(edits: &[LineEdit], start: usize) -> u32 {
    edits[..start]
        .iter()
        .rev()
        .find_map(|e| match *e {
            LineEdit::Keep { old, .. } | LineEdit::Delete { old } => Some(old as u32 + 1),
            LineEdit::Insert { .. } => None,
        })
        .unwrap_or(0)
}

fn new_anchor_before(edits: &[LineEdit], start: usize) -> u32 {
    edits[..start]
        .iter()
        .rev()
        .find_map(|e| match *e {
            LineEdit::Keep { new, .. } | LineEdit::Insert { new } => Some(new as u32 + 1),
            LineEdit::Delete { .. } => None,
        })
        .unwrap_or(0)
}
