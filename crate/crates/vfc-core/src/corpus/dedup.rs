//! Two complementary deduplication passes over aggregated records.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::record::CommitRecord;

/// Merge records sharing (repo, sha), unioning their metadata. Groups
/// whose labels disagree are dropped entirely.
pub fn dedup_exact(records: Vec<CommitRecord>) -> Vec<CommitRecord> {
    let mut first_index: HashMap<(String, String), usize> = HashMap::new();
    let mut merged: Vec<Option<CommitRecord>> = Vec::new();
    for record in records {
        let key = (record.repo.to_string(), record.sha.clone());
        match first_index.get(&key) {
            None => {
                first_index.insert(key, merged.len());
                merged.push(Some(record));
            }
            Some(&i) => {
                let Some(kept) = merged[i].as_mut() else {
                    // Group already dropped for label conflict.
                    continue;
                };
                if kept.label != record.label {
                    merged[i] = None;
                    continue;
                }
                kept.sources.extend(record.sources);
                kept.label_source.extend(record.label_source);
                kept.cve_ids.extend(record.cve_ids);
                kept.languages.extend(record.languages);
                if kept.message.is_empty() {
                    kept.message = record.message;
                }
                if kept.diff.is_empty() {
                    kept.diff = record.diff;
                }
                if kept.group_id.is_empty() {
                    kept.group_id = record.group_id;
                }
            }
        }
    }
    merged.into_iter().flatten().collect()
}

/// Semantic fingerprint: the sorted modified paths plus the diff body with
/// index/sha header lines removed and whitespace runs collapsed. Catches
/// the same patch recorded under mirror repositories.
pub fn semantic_fingerprint(record: &CommitRecord) -> [u8; 32] {
    let mut paths: Vec<&str> = Vec::new();
    let mut body = String::new();
    for line in record.diff.lines() {
        if line.starts_with("index ")
            || line.starts_with("diff --git")
            || line.starts_with("commit ")
            || line.starts_with("similarity index")
        {
            continue;
        }
        if let Some(p) = line.strip_prefix("--- ") {
            paths.push(clean(p));
            continue;
        }
        if let Some(p) = line.strip_prefix("+++ ") {
            paths.push(clean(p));
            continue;
        }
        let mut last_space = false;
        for c in line.chars() {
            if c.is_whitespace() {
                if !last_space {
                    body.push(' ');
                }
                last_space = true;
            } else {
                body.push(c);
                last_space = false;
            }
        }
        body.push('\n');
    }
    paths.sort_unstable();
    paths.dedup();
    let mut hasher = Sha256::new();
    for p in paths {
        hasher.update(p.as_bytes());
        hasher.update([0]);
    }
    hasher.update([1]);
    hasher.update(body.as_bytes());
    hasher.finalize().into()
}

fn clean(path: &str) -> &str {
    let p = path.split('\t').next().unwrap_or(path);
    p.strip_prefix("a/").or_else(|| p.strip_prefix("b/")).unwrap_or(p)
}

/// Within each fingerprint class keep the record with the most metadata:
/// most CVE ids, then most sources, then lexicographically smallest repo,
/// then smallest sha. Run [`dedup_exact`] first.
pub fn dedup_semantic(records: Vec<CommitRecord>) -> Vec<CommitRecord> {
    let mut best: HashMap<[u8; 32], usize> = HashMap::new();
    let fingerprints: Vec<[u8; 32]> = records.iter().map(semantic_fingerprint).collect();
    for (i, fp) in fingerprints.iter().enumerate() {
        match best.get(fp) {
            None => {
                best.insert(*fp, i);
            }
            Some(&j) => {
                if richer(&records[i], &records[j]) {
                    best.insert(*fp, i);
                }
            }
        }
    }
    records
        .into_iter()
        .enumerate()
        .filter(|(i, _)| best.get(&fingerprints[*i]) == Some(i))
        .map(|(_, r)| r)
        .collect()
}

fn richer(a: &CommitRecord, b: &CommitRecord) -> bool {
    (a.cve_ids.len(), a.sources.len()).cmp(&(b.cve_ids.len(), b.sources.len()))
        == std::cmp::Ordering::Greater
        || ((a.cve_ids.len(), a.sources.len()) == (b.cve_ids.len(), b.sources.len())
            && (a.repo.to_string(), a.sha.clone()) < (b.repo.to_string(), b.sha.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::record::{ingest_str, Label};

    fn record(repo: &str, sha_char: char, label: &str, cves: &[&str], sources: &[&str]) -> CommitRecord {
        let line = format!(
            r#"{{"repo":"{repo}","sha":"{}","timestamp":1,"label":"{label}","cve_ids":{},"sources":{},"diff":"--- a/f.c\n+++ b/f.c\n@@ -1 +1 @@\n-a\n+b\n"}}"#,
            sha_char.to_string().repeat(40),
            serde_json::to_string(cves).unwrap(),
            serde_json::to_string(sources).unwrap(),
        );
        ingest_str(&line).records.remove(0)
    }

    #[test]
    fn no_duplicates_is_identity() {
        let rs = vec![
            record("github.com/a/b", 'a', "VFC", &[], &["ds1"]),
            record("github.com/a/c", 'b', "NonVFC", &[], &["ds1"]),
        ];
        let out = dedup_exact(rs.clone());
        assert_eq!(out, rs);
    }

    #[test]
    fn same_key_same_label_merges_metadata() {
        let rs = vec![
            record("github.com/a/b", 'a', "VFC", &["CVE-2020-1"], &["ds1"]),
            record("github.com/a/b", 'a', "VFC", &["CVE-2020-2"], &["ds2"]),
        ];
        let out = dedup_exact(rs);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cve_ids.len(), 2);
        assert_eq!(out[0].sources.len(), 2);
    }

    #[test]
    fn label_conflict_drops_the_whole_group() {
        let rs = vec![
            record("github.com/a/b", 'a', "VFC", &[], &["ds1"]),
            record("github.com/a/b", 'a', "NonVFC", &[], &["ds2"]),
            record("github.com/a/c", 'b', "VFC", &[], &["ds1"]),
        ];
        let out = dedup_exact(rs);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].sha, "b".repeat(40));
    }

    #[test]
    fn conflict_group_stays_dropped_after_more_members() {
        let rs = vec![
            record("github.com/a/b", 'a', "VFC", &[], &["ds1"]),
            record("github.com/a/b", 'a', "NonVFC", &[], &["ds2"]),
            record("github.com/a/b", 'a', "VFC", &[], &["ds3"]),
        ];
        let out = dedup_exact(rs);
        assert!(out.is_empty());
    }

    #[test]
    fn exact_dedup_is_idempotent() {
        let rs = vec![
            record("github.com/a/b", 'a', "VFC", &["CVE-1"], &["ds1"]),
            record("github.com/a/b", 'a', "VFC", &[], &["ds2"]),
            record("github.com/x/y", 'c', "NonVFC", &[], &[]),
        ];
        let once = dedup_exact(rs);
        let twice = dedup_exact(once.clone());
        assert_eq!(once, twice);
    }

    #[test]
    fn mirror_commits_collapse_to_one_survivor() {
        let a = record("github.com/origin/proj", 'a', "VFC", &["CVE-1"], &["ds1"]);
        let b = record("github.com/mirror/proj", 'b', "VFC", &[], &["ds2"]);
        assert_eq!(semantic_fingerprint(&a), semantic_fingerprint(&b));
        let out = dedup_semantic(vec![a, b]);
        assert_eq!(out.len(), 1);
        // The richer record (more CVE ids) survives.
        assert_eq!(out[0].repo.owner, "origin");
    }

    #[test]
    fn index_lines_do_not_affect_the_fingerprint() {
        let mut a = record("github.com/a/b", 'a', "VFC", &[], &[]);
        let mut b = record("github.com/a/c", 'b', "VFC", &[], &[]);
        a.diff = "diff --git a/f.c b/f.c\nindex 111..222 100644\n--- a/f.c\n+++ b/f.c\n@@ -1 +1 @@\n-a\n+b\n".into();
        b.diff = "diff --git a/f.c b/f.c\nindex 333..444 100644\n--- a/f.c\n+++ b/f.c\n@@ -1 +1 @@\n-a\n+b\n".into();
        assert_eq!(semantic_fingerprint(&a), semantic_fingerprint(&b));
    }

    #[test]
    fn whitespace_runs_collapse_in_fingerprint() {
        let mut a = record("github.com/a/b", 'a', "VFC", &[], &[]);
        let mut b = record("github.com/a/c", 'b', "VFC", &[], &[]);
        a.diff = "--- a/f.c\n+++ b/f.c\n@@ -1 +1 @@\n-int  x ;\n+int y;\n".into();
        b.diff = "--- a/f.c\n+++ b/f.c\n@@ -1 +1 @@\n-int x ;\n+int y;\n".into();
        assert_eq!(semantic_fingerprint(&a), semantic_fingerprint(&b));
    }

    #[test]
    fn distinct_diffs_survive_semantic_dedup() {
        let mut a = record("github.com/a/b", 'a', "VFC", &[], &[]);
        let b = record("github.com/a/c", 'b', "VFC", &[], &[]);
        a.diff = "--- a/g.c\n+++ b/g.c\n@@ -1 +1 @@\n-x\n+y\n".into();
        let out = dedup_semantic(vec![a, b]);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn semantic_dedup_is_idempotent() {
        let a = record("github.com/origin/proj", 'a', "VFC", &["CVE-1"], &[]);
        let b = record("github.com/mirror/proj", 'b', "VFC", &[], &[]);
        let once = dedup_semantic(vec![a, b]);
        let twice = dedup_semantic(once.clone());
        assert_eq!(once, twice);
    }

    #[test]
    fn label_check_uses_label_not_sources() {
        let a = record("github.com/a/b", 'a', "VFC", &[], &["ds1"]);
        let mut b = record("github.com/a/b", 'e', "VFC", &[], &["ds2"]);
        b.sha = a.sha.clone();
        assert_eq!(a.label, Label::Vfc);
        let out = dedup_exact(vec![a, b]);
        assert_eq!(out.len(), 1);
    }
}
