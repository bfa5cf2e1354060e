//! Round-trip and patch-soundness properties of the diff model.

mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{apply_file_diff, mutate_lines, random_lines};
use vfc_core::diff::{
    compute_unified_diff, parse_unified_diff, render_unified_diff, CommitDiff,
};

fn fixture_texts() -> Vec<(String, String)> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/diffs");
    let mut out = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap()).collect();
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let name = entry.file_name().to_string_lossy().into_owned();
        out.push((name, std::fs::read_to_string(entry.path()).unwrap()));
    }
    out
}

#[test]
fn canonical_git_fixtures_roundtrip_byte_exact() {
    for (name, text) in fixture_texts() {
        let parsed = parse_unified_diff(&text, None).unwrap_or_else(|e| {
            panic!("fixture {name} failed to parse: {e}");
        });
        let rendered = render_unified_diff(&parsed).unwrap();
        assert_eq!(rendered, text, "fixture {name} did not round-trip");
    }
}

#[test]
fn fixture_hunk_counts_match_bodies() {
    for (name, text) in fixture_texts() {
        let parsed = parse_unified_diff(&text, None).unwrap();
        for file in &parsed.files {
            assert!(file.hunks.iter().all(|h| h.counts_consistent()), "{name}");
            if file.is_binary {
                assert!(file.hunks.is_empty(), "{name}: binary file with hunks");
            }
        }
    }
}

#[test]
fn applying_computed_diff_reproduces_post_on_random_edits() {
    let mut rng = StdRng::seed_from_u64(40);
    for case in 0..500 {
        let pre_lines = random_lines(&mut rng, 50);
        let post_lines = mutate_lines(&mut rng, &pre_lines);
        let mut pre = pre_lines.join("\n");
        let mut post = post_lines.join("\n");
        // Vary trailing-newline state across cases.
        if case % 3 != 0 && !pre.is_empty() {
            pre.push('\n');
        }
        if case % 4 != 0 && !post.is_empty() {
            post.push('\n');
        }
        let context = case % 5;
        let diff = compute_unified_diff(&pre, &post, context);
        let applied = apply_file_diff(&pre, &diff)
            .unwrap_or_else(|e| panic!("case {case}: apply failed: {e}"));
        assert_eq!(applied, post, "case {case} (context {context})");
    }
}

#[test]
fn empty_and_degenerate_inputs() {
    let diff = compute_unified_diff("", "", 3);
    assert!(diff.hunks.is_empty());
    assert_eq!(apply_file_diff("", &diff).unwrap(), "");

    let diff = compute_unified_diff("", "a\n", 3);
    assert_eq!(apply_file_diff("", &diff).unwrap(), "a\n");

    let diff = compute_unified_diff("a\n", "", 3);
    assert_eq!(apply_file_diff("a\n", &diff).unwrap(), "");

    // Trailing-newline-only change.
    let diff = compute_unified_diff("a\nb\n", "a\nb", 3);
    assert_eq!(apply_file_diff("a\nb\n", &diff).unwrap(), "a\nb");
    let diff = compute_unified_diff("a\nb", "a\nb\n", 3);
    assert_eq!(apply_file_diff("a\nb", &diff).unwrap(), "a\nb\n");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// parse(render(x)) == x for computed diffs wrapped in a commit.
    #[test]
    fn parse_render_identity_on_computed_diffs(
        pre in proptest::collection::vec("[ab{};]{0,8}", 0..30),
        edits in proptest::collection::vec((0usize..30, "[cd{};]{0,8}"), 0..6),
        context in 0usize..4,
    ) {
        let pre_text = if pre.is_empty() { String::new() } else { pre.join("\n") + "\n" };
        let mut post = pre.clone();
        for (at, text) in edits {
            if post.is_empty() {
                post.push(text);
            } else {
                let i = at % post.len();
                post[i] = text;
            }
        }
        let post_text = if post.is_empty() { String::new() } else { post.join("\n") + "\n" };
        let file = compute_unified_diff(&pre_text, &post_text, context);
        let commit = CommitDiff {
            files: vec![file],
            trailing_newline: true,
            ..CommitDiff::default()
        };
        let rendered = render_unified_diff(&commit).unwrap();
        let reparsed = parse_unified_diff(&rendered, None).unwrap();
        // Hunk structure and line content survive the round trip.
        prop_assert_eq!(reparsed.files.len(), 1);
        let orig = &commit.files[0];
        let back = &reparsed.files[0];
        prop_assert_eq!(orig.hunks.len(), back.hunks.len());
        for (a, b) in orig.hunks.iter().zip(&back.hunks) {
            prop_assert_eq!(a, b);
        }
        // And rendering again is byte-identical.
        prop_assert_eq!(render_unified_diff(&reparsed).unwrap(), rendered);
    }

    /// Patch soundness under proptest-sized random edits.
    #[test]
    fn computed_diffs_apply_cleanly(
        pre in proptest::collection::vec("[xy();]{0,6}", 0..25),
        post in proptest::collection::vec("[xz();]{0,6}", 0..25),
        context in 0usize..4,
    ) {
        let pre_text = if pre.is_empty() { String::new() } else { pre.join("\n") + "\n" };
        let post_text = if post.is_empty() { String::new() } else { post.join("\n") + "\n" };
        let diff = compute_unified_diff(&pre_text, &post_text, context);
        for hunk in &diff.hunks {
            prop_assert!(hunk.counts_consistent());
        }
        let applied = apply_file_diff(&pre_text, &diff).map_err(|e| {
            TestCaseError::fail(format!("apply failed: {e}"))
        })?;
        prop_assert_eq!(applied, post_text);
    }
}
