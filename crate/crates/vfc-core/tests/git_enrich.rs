//! Enrichment with snapshots resolved from a local git clone: the pre
//! side reads from the commit's first parent.

use std::process::Command;

use vfc_core::corpus::{ingest_str, SnapshotStore};
use vfc_core::enrich::{enrich_commit, EnrichmentLevel, LineTag};

fn git(repo: &std::path::Path, args: &[&str]) -> String {
    let out = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(args)
        .env("GIT_AUTHOR_NAME", "t")
        .env("GIT_AUTHOR_EMAIL", "t@t")
        .env("GIT_COMMITTER_NAME", "t")
        .env("GIT_COMMITTER_EMAIL", "t@t")
        .output()
        .expect("git runs");
    assert!(
        out.status.success(),
        "git {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn enrich_resolves_pre_version_from_parent_commit() {
    let root = tempfile::tempdir().unwrap();
    let repo_dir = root.path().join("github.com/team/proj");
    std::fs::create_dir_all(&repo_dir).unwrap();
    git(&repo_dir, &["init", "-q"]);

    let pre = "\
int open_session(int id) {
    session_t *s = alloc_session(id);
    if (s != 0) {
        register_session(s);
    }
    return 0;
}
";
    let post = "\
int open_session(int id) {
    session_t *s = alloc_session(id);
    if (s != 0) {
        register_session(s);
        audit_log(s);
    }
    return 0;
}
";
    std::fs::create_dir_all(repo_dir.join("src")).unwrap();
    std::fs::write(repo_dir.join("src/session.c"), pre).unwrap();
    git(&repo_dir, &["add", "."]);
    git(&repo_dir, &["commit", "-q", "-m", "base"]);
    std::fs::write(repo_dir.join("src/session.c"), post).unwrap();
    git(&repo_dir, &["add", "."]);
    git(&repo_dir, &["commit", "-q", "-m", "add audit logging"]);
    let sha = git(&repo_dir, &["rev-parse", "HEAD"]).trim().to_string();
    let diff_text = git(&repo_dir, &["diff", "HEAD^", "HEAD"]);

    let line = serde_json::json!({
        "repo": "github.com/team/proj",
        "sha": sha,
        "timestamp": 100,
        "diff": diff_text,
        "label": "VFC",
    });
    let record = ingest_str(&line.to_string()).records.remove(0);

    let store = SnapshotStore::local_git(root.path());
    let enriched = enrich_commit(&record, &store, EnrichmentLevel::Df1).unwrap();
    assert_eq!(enriched.fallback_files, 0, "git snapshots must resolve");

    let changed: Vec<&str> = enriched
        .changed_lines()
        .iter()
        .map(|(_, text)| text.trim())
        .collect();
    assert_eq!(changed, vec!["audit_log(s);"]);
    let ctx: Vec<(LineTag, String)> = enriched
        .context_lines()
        .iter()
        .map(|l| (l.tag, l.text.trim().to_string()))
        .collect();
    // The guarding if encloses; the allocation arrives through data flow.
    assert!(ctx.contains(&(LineTag::CtxControl, "if (s != 0) {".to_string())), "{ctx:?}");
    assert!(
        ctx.iter()
            .any(|(t, l)| *t == LineTag::CtxDataflow && l.contains("alloc_session")),
        "{ctx:?}"
    );
}
