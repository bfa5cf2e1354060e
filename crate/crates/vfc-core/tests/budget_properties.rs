//! Truncation invariants over arbitrary documents.

use proptest::prelude::*;

use vfc_core::budget::{truncate_context_aware, truncate_naive, LineClass, Tokenizer};
use vfc_core::diff::DocumentLine;

fn arb_line() -> impl Strategy<Value = DocumentLine> {
    let class = prop_oneof![
        3 => Just(LineClass::Context),
        2 => Just(LineClass::Change),
        1 => Just(LineClass::Header),
        1 => Just(LineClass::Message),
    ];
    (class, "[a-z =;()+]{0,24}", 0usize..3).prop_map(|(class, text, file)| {
        let marker = match class {
            LineClass::Change => "+",
            LineClass::Context => " ",
            _ => "",
        };
        DocumentLine {
            rendered: format!("{marker}{text}"),
            text,
            class,
            file: Some(file),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// On every document and limit, context-aware truncation never discards
    /// more change tokens than naive truncation.
    #[test]
    fn context_aware_dominates_naive(
        lines in proptest::collection::vec(arb_line(), 0..60),
        limit in 1usize..400,
    ) {
        let tok = Tokenizer::builtin();
        let (_, aware) = truncate_context_aware(&lines, limit, &tok).unwrap();
        let (_, naive) = truncate_naive(&lines, limit, &tok).unwrap();
        prop_assert!(
            aware.discarded_change_fraction <= naive.discarded_change_fraction + 1e-12,
            "aware {} > naive {}",
            aware.discarded_change_fraction,
            naive.discarded_change_fraction
        );
    }

    /// Raising the limit never increases the removed change tokens, and the
    /// post-truncation size complies with the budget whenever the changed
    /// lines alone fit.
    #[test]
    fn limits_are_monotone_and_respected(
        lines in proptest::collection::vec(arb_line(), 0..60),
        limit in 1usize..300,
        bump in 1usize..100,
    ) {
        let tok = Tokenizer::builtin();
        let (kept, report) = truncate_context_aware(&lines, limit, &tok).unwrap();
        let (_, report_higher) = truncate_context_aware(&lines, limit + bump, &tok).unwrap();
        prop_assert!(report_higher.removed.change <= report.removed.change);

        let change_tokens: usize = lines
            .iter()
            .filter(|l| l.class == LineClass::Change)
            .map(|l| tok.count(&l.text))
            .sum();
        let kept_total: usize = kept.iter().map(|l| tok.count(&l.text)).sum();
        if change_tokens <= limit {
            prop_assert!(kept_total <= limit, "kept {kept_total} over limit {limit}");
        } else {
            // Output is exactly the change-lines prefix at the limit.
            prop_assert_eq!(kept_total, limit);
            prop_assert!(kept.iter().all(|l| l.class == LineClass::Change));
        }
    }

    /// The truncation report partitions removed tokens by class and its
    /// change fraction matches the counts.
    #[test]
    fn report_is_consistent(
        lines in proptest::collection::vec(arb_line(), 0..50),
        limit in 1usize..200,
    ) {
        let tok = Tokenizer::builtin();
        let before: usize = lines.iter().map(|l| tok.count(&l.text)).sum();
        let (kept, report) = truncate_context_aware(&lines, limit, &tok).unwrap();
        let after: usize = kept.iter().map(|l| tok.count(&l.text)).sum();
        let removed = report.removed;
        prop_assert_eq!(
            removed.change + removed.header + removed.context + removed.message,
            before - after
        );
        prop_assert_eq!(report.affected, before != after);
        prop_assert!((0.0..=1.0).contains(&report.discarded_change_fraction));
    }
}
