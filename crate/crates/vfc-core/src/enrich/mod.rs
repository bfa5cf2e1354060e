//! Semantic diff enrichment: def-use slicing, control-flow enclosures, and
//! the merged enriched-diff representation.
//!
//! Enrichment replaces the physically neighbouring context lines of a
//! unified diff with semantically targeted context. Three levels exist:
//! `cf` keeps only the control-flow enclosures of the changed statements,
//! `df1` adds one data-flow pass along definition-use chains, `df2` adds a
//! second pass.

mod pipeline;
mod render;

pub use pipeline::{enrich_commit, enrich_commit_with, enrich_diff, EnrichError, EnrichOptions};
pub use render::{EnrichedDiff, EnrichedFile, EnrichedLine, EnrichedSection, LineTag, Provenance};

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::structdiff::StatementSet;
use crate::syntax::StatementIR;

/// Enrichment level; the data-flow depth is 0, 1, or 2 passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnrichmentLevel {
    Cf,
    Df1,
    Df2,
}

impl EnrichmentLevel {
    pub fn depth(self) -> usize {
        match self {
            EnrichmentLevel::Cf => 0,
            EnrichmentLevel::Df1 => 1,
            EnrichmentLevel::Df2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnrichmentLevel::Cf => "cf",
            EnrichmentLevel::Df1 => "df1",
            EnrichmentLevel::Df2 => "df2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cf" => Some(EnrichmentLevel::Cf),
            "df1" => Some(EnrichmentLevel::Df1),
            "df2" => Some(EnrichmentLevel::Df2),
            _ => None,
        }
    }
}

/// Statements that influence the seeds through def-use chains, bounded by
/// depth `d`. Depth 0 is empty; depth `d` is the union of the direct
/// writers of the seeds' reads with the `d-1` expansion of those writers.
/// Seeds themselves are excluded from the result.
pub fn backward_slice(seed: &StatementSet, ir: &StatementIR, d: usize) -> StatementSet {
    StatementSet::from_ids(
        seed.side,
        backward_slice_depths(seed, ir, d).into_keys(),
    )
}

/// Like [`backward_slice`] but reports the pass at which each statement
/// was first reached (1-based).
pub fn backward_slice_depths(
    seed: &StatementSet,
    ir: &StatementIR,
    d: usize,
) -> BTreeMap<usize, usize> {
    slice_depths(seed, ir, d, Direction::Backward)
}

/// Statements influenced by the seeds: subsequent readers of variables the
/// seeds write, expanded up to depth `d`.
pub fn forward_slice(seed: &StatementSet, ir: &StatementIR, d: usize) -> StatementSet {
    StatementSet::from_ids(seed.side, forward_slice_depths(seed, ir, d).into_keys())
}

pub fn forward_slice_depths(
    seed: &StatementSet,
    ir: &StatementIR,
    d: usize,
) -> BTreeMap<usize, usize> {
    slice_depths(seed, ir, d, Direction::Forward)
}

#[derive(Clone, Copy)]
enum Direction {
    Backward,
    Forward,
}

fn slice_depths(
    seed: &StatementSet,
    ir: &StatementIR,
    d: usize,
    direction: Direction,
) -> BTreeMap<usize, usize> {
    let mut found: BTreeMap<usize, usize> = BTreeMap::new();
    let mut frontier: BTreeSet<usize> = seed.ids.clone();
    for pass in 1..=d {
        let mut next: BTreeSet<usize> = BTreeSet::new();
        for &s in &frontier {
            let stmt = &ir.statements[s];
            for candidate in &ir.statements {
                let hit = match direction {
                    // Preceding writers of a variable the statement reads.
                    Direction::Backward => {
                        candidate.id < stmt.id
                            && candidate.writes.intersection(&stmt.reads).next().is_some()
                    }
                    // Subsequent readers of a variable the statement writes.
                    Direction::Forward => {
                        candidate.id > stmt.id
                            && candidate.reads.intersection(&stmt.writes).next().is_some()
                    }
                };
                if hit {
                    next.insert(candidate.id);
                }
            }
        }
        for &id in &next {
            found.entry(id).or_insert(pass);
        }
        frontier = next;
    }
    for s in &seed.ids {
        found.remove(s);
    }
    found
}

/// The innermost control-flow enclosure of each seed statement,
/// deduplicated. Top-level statements contribute nothing.
pub fn control_flow_enclosure(seed: &StatementSet, ir: &StatementIR) -> StatementSet {
    let mut out = StatementSet::empty(seed.side);
    for &s in &seed.ids {
        if let Some(&innermost) = ir.statements[s].enclosure_chain.first() {
            out.ids.insert(innermost);
        }
    }
    out
}

/// The full enclosure chain of each seed statement (innermost through
/// outermost), for callers that want the whole nesting rather than only
/// the immediate construct.
pub fn control_flow_enclosure_chain(seed: &StatementSet, ir: &StatementIR) -> StatementSet {
    let mut out = StatementSet::empty(seed.side);
    for &s in &seed.ids {
        out.ids.extend(ir.statements[s].enclosure_chain.iter().copied());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structdiff::Side;
    use crate::syntax::{build_statement_ir, parse_source, Language};

    fn three_chain_ir() -> StatementIR {
        let src = "void f() {\n  a = 1;\n  b = a;\n  use(b);\n}\n";
        let tree = parse_source(src, Language::C).unwrap();
        build_statement_ir(&tree)
    }

    fn seed(ids: &[usize]) -> StatementSet {
        StatementSet::from_ids(Side::Pre, ids.iter().copied())
    }

    #[test]
    fn depth_zero_is_empty() {
        let ir = three_chain_ir();
        assert!(backward_slice(&seed(&[2]), &ir, 0).is_empty());
        assert!(forward_slice(&seed(&[0]), &ir, 0).is_empty());
    }

    #[test]
    fn backward_chain_expands_with_depth() {
        let ir = three_chain_ir();
        // s0: a=1; s1: b=a; s2: use(b);
        let d1 = backward_slice(&seed(&[2]), &ir, 1);
        assert_eq!(d1.ids.iter().copied().collect::<Vec<_>>(), vec![1]);
        let d2 = backward_slice(&seed(&[2]), &ir, 2);
        assert_eq!(d2.ids.iter().copied().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn forward_chain_expands_with_depth() {
        let ir = three_chain_ir();
        let d1 = forward_slice(&seed(&[0]), &ir, 1);
        assert_eq!(d1.ids.iter().copied().collect::<Vec<_>>(), vec![1]);
        let d2 = forward_slice(&seed(&[0]), &ir, 2);
        assert_eq!(d2.ids.iter().copied().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn empty_read_set_slices_to_nothing() {
        let ir = three_chain_ir();
        // s0 "a = 1;" reads nothing.
        assert!(backward_slice(&seed(&[0]), &ir, 2).is_empty());
        // s2 "use(b);" writes nothing.
        assert!(forward_slice(&seed(&[2]), &ir, 2).is_empty());
    }

    #[test]
    fn seeds_are_excluded_from_results() {
        let src = "void f() {\n  x = 1;\n  x = x + 1;\n  y = x;\n}\n";
        let tree = parse_source(src, Language::C).unwrap();
        let ir = build_statement_ir(&tree);
        let result = backward_slice(&seed(&[1, 2]), &ir, 2);
        assert!(!result.ids.contains(&1));
        assert!(!result.ids.contains(&2));
        assert!(result.ids.contains(&0));
    }

    #[test]
    fn slice_depths_record_first_pass() {
        let ir = three_chain_ir();
        let depths = backward_slice_depths(&seed(&[2]), &ir, 2);
        assert_eq!(depths.get(&1), Some(&1));
        assert_eq!(depths.get(&0), Some(&2));
    }

    #[test]
    fn innermost_enclosure_only() {
        let src = "void f() {\n  for (i = 0; i < n; i++) {\n    if (a) {\n      x = 1;\n    }\n  }\n}\n";
        let tree = parse_source(src, Language::C).unwrap();
        let ir = build_statement_ir(&tree);
        let target = ir
            .statements
            .iter()
            .find(|s| s.writes.contains("x"))
            .unwrap()
            .id;
        let encl = control_flow_enclosure(&seed(&[target]), &ir);
        assert_eq!(encl.ids.len(), 1);
        let header = &ir.statements[*encl.ids.iter().next().unwrap()];
        assert!(header.text.starts_with("if"));

        let chain = control_flow_enclosure_chain(&seed(&[target]), &ir);
        assert_eq!(chain.ids.len(), 2);
    }

    #[test]
    fn top_level_seed_has_no_enclosure() {
        let ir = three_chain_ir();
        assert!(control_flow_enclosure(&seed(&[0]), &ir).is_empty());
    }

    #[test]
    fn shared_enclosure_appears_once() {
        let src = "void f() {\n  if (a) {\n    x = 1;\n    y = 2;\n  }\n}\n";
        let tree = parse_source(src, Language::C).unwrap();
        let ir = build_statement_ir(&tree);
        let encl = control_flow_enclosure(&seed(&[1, 2]), &ir);
        assert_eq!(encl.ids.len(), 1);
    }
}
