//! Shared test utilities: the patch-application oracle and synthetic
//! corpus generators. Everything here is oracle-side code, independent of
//! the library paths it checks.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use vfc_core::corpus::{CommitRecord, RepoId, SnapshotStore};
use vfc_core::diff::{
    compute_unified_diff_with_paths, render_unified_diff, CommitDiff, FileDiff, LineKind,
};
use vfc_core::structdiff::Side;

/// Apply a file diff to the old content, reproducing the new content.
/// Independent reimplementation used as the oracle for diff regeneration:
/// it trusts only the hunk line numbers and bodies.
pub fn apply_file_diff(pre: &str, diff: &FileDiff) -> Result<String, String> {
    let pre_lines: Vec<&str> = if pre.is_empty() {
        Vec::new()
    } else {
        let mut v: Vec<&str> = pre.split('\n').collect();
        if pre.ends_with('\n') {
            v.pop();
        }
        v
    };
    let mut out: Vec<String> = Vec::new();
    let mut cursor = 0usize;
    let mut no_trailing_newline = false;

    for hunk in &diff.hunks {
        let hunk_start = if hunk.old_count == 0 {
            hunk.old_start as usize
        } else {
            hunk.old_start as usize - 1
        };
        if hunk_start < cursor {
            return Err(format!("hunk starts at {hunk_start} before cursor {cursor}"));
        }
        while cursor < hunk_start {
            let line = pre_lines
                .get(cursor)
                .ok_or_else(|| format!("old file ends before hunk at {hunk_start}"))?;
            out.push((*line).to_string());
            cursor += 1;
        }
        let mut last_emitted_new = false;
        for line in &hunk.lines {
            match line.kind {
                LineKind::Context => {
                    let actual = pre_lines
                        .get(cursor)
                        .ok_or_else(|| "old file ended inside hunk".to_string())?;
                    if *actual != line.text {
                        return Err(format!(
                            "context mismatch at old line {}: {:?} vs {:?}",
                            cursor + 1,
                            actual,
                            line.text
                        ));
                    }
                    out.push(line.text.clone());
                    cursor += 1;
                    last_emitted_new = true;
                }
                LineKind::Deleted => {
                    let actual = pre_lines
                        .get(cursor)
                        .ok_or_else(|| "old file ended inside hunk".to_string())?;
                    if *actual != line.text {
                        return Err(format!(
                            "delete mismatch at old line {}: {:?} vs {:?}",
                            cursor + 1,
                            actual,
                            line.text
                        ));
                    }
                    cursor += 1;
                    last_emitted_new = false;
                }
                LineKind::Added => {
                    out.push(line.text.clone());
                    last_emitted_new = true;
                }
                LineKind::Header | LineKind::Message => {
                    // `\ No newline at end of file` after a line that went
                    // into the output marks the new file as unterminated.
                    if line.text.starts_with('\\') && last_emitted_new {
                        no_trailing_newline = true;
                    }
                }
            }
        }
    }
    // An untouched tail keeps the old file's termination state.
    let pre_terminated = pre.is_empty() || pre.ends_with('\n');
    while cursor < pre_lines.len() {
        out.push(pre_lines[cursor].to_string());
        cursor += 1;
        no_trailing_newline = !pre_terminated;
    }
    if out.is_empty() {
        return Ok(String::new());
    }
    let mut text = out.join("\n");
    if !no_trailing_newline {
        text.push('\n');
    }
    Ok(text)
}

/// Random line content drawn from a small alphabet so repeated lines and
/// ambiguous alignments actually occur.
pub fn random_lines(rng: &mut StdRng, n: usize) -> Vec<String> {
    let words = ["alpha", "beta", "x = 1;", "}", "{", "return;", "call();", ""];
    (0..n)
        .map(|_| words[rng.random_range(0..words.len())].to_string())
        .collect()
}

/// Mutate a line vector with a small random edit script.
pub fn mutate_lines(rng: &mut StdRng, lines: &[String]) -> Vec<String> {
    let mut out: Vec<String> = lines.to_vec();
    let edits = rng.random_range(1..=4);
    for _ in 0..edits {
        let choice = rng.random_range(0..3);
        match choice {
            0 if !out.is_empty() => {
                let at = rng.random_range(0..out.len());
                out.remove(at);
            }
            1 => {
                let at = rng.random_range(0..=out.len());
                out.insert(at, format!("inserted {}", rng.random_range(0..100)));
            }
            _ if !out.is_empty() => {
                let at = rng.random_range(0..out.len());
                out[at] = format!("replaced {}", rng.random_range(0..100));
            }
            _ => {}
        }
    }
    out
}

/// A generated C function made of simple statements over a small variable
/// pool, optionally nested in `if`/`for` blocks.
pub struct GeneratedFunction {
    pub name: String,
    pub text: String,
}

pub fn generate_function(rng: &mut StdRng, name: &str, statements: usize) -> GeneratedFunction {
    let vars = ["v0", "v1", "v2", "v3", "v4"];
    let mut body: Vec<String> = Vec::new();
    let mut depth = 0usize;
    let mut opened = 0usize;
    for i in 0..statements {
        let indent = "    ".repeat(depth + 1);
        let a = vars[rng.random_range(0..vars.len())];
        let b = vars[rng.random_range(0..vars.len())];
        let c = vars[rng.random_range(0..vars.len())];
        match rng.random_range(0..8) {
            0 => body.push(format!("{indent}{a} = {};", rng.random_range(0..50))),
            1 => body.push(format!("{indent}{a} = {b} + {c};")),
            2 => body.push(format!("{indent}{a} = {b} * 2;")),
            3 => body.push(format!("{indent}use({a});")),
            4 => body.push(format!("{indent}check({a}, {b});")),
            5 if depth < 2 => {
                body.push(format!("{indent}if ({a} > {}) {{", rng.random_range(0..10)));
                depth += 1;
                opened += 1;
            }
            6 if depth < 2 => {
                body.push(format!(
                    "{indent}for ({a} = 0; {a} < {}; {a}++) {{",
                    rng.random_range(1..8)
                ));
                depth += 1;
                opened += 1;
            }
            _ => body.push(format!("{indent}{a} = {b};")),
        }
        // Close blocks occasionally, and always by the end.
        if depth > 0 && (rng.random_range(0..3) == 0 || i + 1 == statements) {
            while depth > 0 {
                depth -= 1;
                body.push(format!("{}}}", "    ".repeat(depth + 1)));
                if rng.random_range(0..2) == 0 {
                    break;
                }
            }
        }
    }
    while depth > 0 {
        depth -= 1;
        body.push(format!("{}}}", "    ".repeat(depth + 1)));
    }
    let _ = opened;
    let mut text = format!("int {name}(int n) {{\n");
    text.push_str("    int v0 = n;\n    int v1 = 0;\n    int v2 = 1;\n    int v3 = 2;\n    int v4 = 3;\n");
    for line in body {
        text.push_str(&line);
        text.push('\n');
    }
    text.push_str("    return v0;\n}\n");
    GeneratedFunction {
        name: name.to_string(),
        text,
    }
}

/// Mutate one generated function: change a random simple statement line,
/// insert a statement, or delete one.
pub fn mutate_function(rng: &mut StdRng, text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    // Candidate lines: simple statements (end with ';'), not the prologue
    // declarations on lines 1..=5, not signature or braces.
    let candidates: Vec<usize> = (6..lines.len().saturating_sub(2))
        .filter(|&i| lines[i].trim_end().ends_with(';'))
        .collect();
    let mut out: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    if candidates.is_empty() {
        out.insert(out.len() - 2, "    v1 = v0 + 1;".to_string());
    } else {
        let at = candidates[rng.random_range(0..candidates.len())];
        match rng.random_range(0..3) {
            0 => {
                let indent: String =
                    out[at].chars().take_while(|c| c.is_whitespace()).collect();
                out[at] = format!("{indent}v1 = v0 + {};", rng.random_range(50..99));
            }
            1 => {
                let indent: String =
                    out[at].chars().take_while(|c| c.is_whitespace()).collect();
                out.insert(at + 1, format!("{indent}use(v1);"));
            }
            _ => {
                out.remove(at);
            }
        }
    }
    out.join("\n") + "\n"
}

/// One synthetic commit: a record whose diff changes a single C file, plus
/// a memory snapshot store serving both versions.
pub struct SyntheticCommit {
    pub record: CommitRecord,
    pub pre: String,
    pub post: String,
}

pub fn synthetic_commit(rng: &mut StdRng, index: usize, statements: usize) -> SyntheticCommit {
    let f = generate_function(rng, "worker", statements);
    let pre = f.text;
    let post = mutate_function(rng, &pre);
    let path = "src/worker.c";
    let file = compute_unified_diff_with_paths(&pre, &post, 3, path, path);
    let diff = CommitDiff {
        files: vec![file],
        trailing_newline: true,
        ..CommitDiff::default()
    };
    let diff_text = render_unified_diff(&diff).expect("valid computed diff");
    let sha = format!("{index:040x}");
    let json = serde_json::json!({
        "repo": format!("github.com/synth/proj{}", index % 7),
        "sha": sha,
        "timestamp": 1_600_000_000 + index as i64,
        "message": "update worker",
        "diff": diff_text,
        "label": if index % 3 == 0 { "VFC" } else { "NonVFC" },
        "languages": ["c"],
        "group_id": format!("proj{}", index % 7),
        "sources": ["synthetic"],
    });
    let record: CommitRecord = serde_json::from_value(json).expect("valid record");
    SyntheticCommit { record, pre, post }
}

/// Snapshot store holding the pre/post contents of synthetic commits.
pub fn store_for(commits: &[SyntheticCommit]) -> SnapshotStore {
    let mut store = SnapshotStore::memory();
    for c in commits {
        let repo: RepoId = c.record.repo.clone();
        store.insert(&repo, &c.record.sha, Side::Pre, "src/worker.c", c.pre.clone());
        store.insert(&repo, &c.record.sha, Side::Post, "src/worker.c", c.post.clone());
    }
    store
}
