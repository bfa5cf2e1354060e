//! Enrichment over hostile inputs: preprocessor noise, labels and gotos,
//! comments everywhere, deep nesting, multi-line statements, and broken
//! syntax. The pipeline must never panic, must preserve changed lines at
//! every level, and must keep context sets monotone.

mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use vfc_core::diff::{compute_unified_diff_with_paths, render_unified_diff, CommitDiff};
use vfc_core::enrich::{enrich_diff, EnrichOptions, EnrichmentLevel};
use vfc_core::syntax::MemoryContents;

fn nasty_function(rng: &mut StdRng) -> String {
    let mut out = String::from("static int gnarly(struct ctx *c, int n) {\n");
    out.push_str("    int v0 = n; /* seed */\n");
    out.push_str("    int v1 = 0;\n");
    let mut depth = 0usize;
    let statements = rng.random_range(5..30);
    for i in 0..statements {
        let indent = "    ".repeat(depth + 1);
        match rng.random_range(0..12) {
            0 => out.push_str(&format!("{indent}v0 = v1 + {i}; // trailing\n")),
            1 => out.push_str(&format!("{indent}c->field = v0;\n")),
            2 => out.push_str(&format!("{indent}buf[v1] = v0;\n")),
            3 => out.push_str(&format!("{indent}v1 = v0 /* mid */ + 1;\n")),
            4 => out.push_str(&format!("{indent}if (v0 > {i}) goto out;\n")),
            5 => out.push_str(&format!("#ifdef FEATURE_{i}\n{indent}v1 = {i};\n#endif\n")),
            6 => out.push_str(&format!(
                "{indent}v0 = long_call(v1,\n{indent}    v0 + {i});\n"
            )),
            7 if depth < 3 => {
                out.push_str(&format!("{indent}while (v0 < {i}) {{\n"));
                depth += 1;
            }
            8 if depth < 3 => {
                out.push_str(&format!("{indent}for (v1 = 0; v1 < {i}; v1++) {{\n"));
                depth += 1;
            }
            9 if depth > 0 => {
                depth -= 1;
                out.push_str(&format!("{}}}\n", "    ".repeat(depth + 1)));
            }
            10 => out.push_str(&format!("{indent}do {{ v0++; }} while (v0 < {i});\n")),
            _ => out.push_str(&format!("{indent}log(\"// not a comment {i}\", v0);\n")),
        }
    }
    while depth > 0 {
        depth -= 1;
        out.push_str(&format!("{}}}\n", "    ".repeat(depth + 1)));
    }
    out.push_str("out:\n    return v0;\n}\n");
    out
}

fn mutate(rng: &mut StdRng, text: &str) -> String {
    let mut lines: Vec<String> = text.lines().map(|l| l.to_string()).collect();
    for _ in 0..rng.random_range(1..4) {
        let at = rng.random_range(1..lines.len().saturating_sub(1).max(2));
        match rng.random_range(0..4) {
            0 => lines[at] = format!("    v1 = v0 * {};", rng.random_range(0..99)),
            1 => lines.insert(at, format!("    check(v0, {});", rng.random_range(0..9))),
            2 => {
                if lines.len() > 4 {
                    lines.remove(at);
                }
            }
            // Break the syntax outright; error nodes must not crash it.
            _ => lines[at] = "    @@@ ??? (((".to_string(),
        }
    }
    lines.join("\n") + "\n"
}

#[test]
fn hostile_functions_never_break_the_invariants() {
    let mut rng = StdRng::seed_from_u64(99);
    for case in 0..200 {
        let pre = nasty_function(&mut rng);
        let post = mutate(&mut rng, &pre);
        let file = compute_unified_diff_with_paths(&pre, &post, 3, "g.c", "g.c");
        let commit = CommitDiff {
            files: vec![file],
            trailing_newline: true,
            ..CommitDiff::default()
        };
        let text = render_unified_diff(&commit).unwrap();
        let contents = MemoryContents::single("g.c", &pre, &post);

        let mut per_level = Vec::new();
        for level in [EnrichmentLevel::Cf, EnrichmentLevel::Df1, EnrichmentLevel::Df2] {
            let enriched = enrich_diff(&text, &contents, level, EnrichOptions::default())
                .unwrap_or_else(|e| panic!("case {case} at {}: {e}\n{pre}", level.name()));
            // Rendering never panics and stays deterministic.
            let rendered = enriched.render_text();
            let again = enrich_diff(&text, &contents, level, EnrichOptions::default()).unwrap();
            assert_eq!(rendered, again.render_text(), "case {case} nondeterministic");
            per_level.push(enriched);
        }

        // Changed lines are identical across levels.
        let changed0 = per_level[0].changed_lines();
        for e in &per_level[1..] {
            assert_eq!(changed0, e.changed_lines(), "case {case}");
        }
        // Context grows monotonically.
        let keys = |e: &vfc_core::enrich::EnrichedDiff| {
            e.context_lines()
                .iter()
                .map(|l| (l.old_lineno, l.new_lineno))
                .collect::<std::collections::BTreeSet<_>>()
        };
        assert!(keys(&per_level[0]).is_subset(&keys(&per_level[1])), "case {case}");
        assert!(keys(&per_level[1]).is_subset(&keys(&per_level[2])), "case {case}");

        // Every context line carries provenance.
        for e in &per_level {
            for line in e.context_lines() {
                assert!(!line.provenance.is_empty(), "case {case}: bare context line");
            }
        }
    }
}

#[test]
fn full_enclosure_chain_is_a_superset_of_innermost() {
    let mut rng = StdRng::seed_from_u64(123);
    for _ in 0..50 {
        let pre = nasty_function(&mut rng);
        let post = mutate(&mut rng, &pre);
        let file = compute_unified_diff_with_paths(&pre, &post, 3, "g.c", "g.c");
        let commit = CommitDiff {
            files: vec![file],
            trailing_newline: true,
            ..CommitDiff::default()
        };
        let text = render_unified_diff(&commit).unwrap();
        let contents = MemoryContents::single("g.c", &pre, &post);
        let innermost = enrich_diff(
            &text,
            &contents,
            EnrichmentLevel::Cf,
            EnrichOptions::default(),
        )
        .unwrap();
        let chain = enrich_diff(
            &text,
            &contents,
            EnrichmentLevel::Cf,
            EnrichOptions {
                full_enclosure_chain: true,
                ..EnrichOptions::default()
            },
        )
        .unwrap();
        let keys = |e: &vfc_core::enrich::EnrichedDiff| {
            e.context_lines()
                .iter()
                .map(|l| (l.old_lineno, l.new_lineno))
                .collect::<std::collections::BTreeSet<_>>()
        };
        assert!(keys(&innermost).is_subset(&keys(&chain)));
    }
}
