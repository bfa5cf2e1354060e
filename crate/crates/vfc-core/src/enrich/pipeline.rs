//! End-to-end enrichment of one commit: strip comments, regenerate the
//! diff, locate changed functions, slice, and merge both sides into the
//! enriched representation.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use super::render::{EnrichedDiff, EnrichedFile, EnrichedLine, EnrichedSection, LineTag, Provenance};
use super::{
    backward_slice_depths, control_flow_enclosure, control_flow_enclosure_chain,
    forward_slice_depths, EnrichmentLevel,
};
use crate::corpus::{CommitRecord, SnapshotStore};
use crate::diff::{
    compute_unified_diff_with_paths, diff_lines, parse_unified_diff, CommitDiff, FileDiff,
    LineEdit, LineKind, ParseError,
};
use crate::structdiff::{changed_statements, match_trees, Side, StatementSet};
use crate::syntax::{
    changed_functions, strip_comments, FileContents, FunctionPair, Language, MemoryContents,
};

#[derive(Debug, Error)]
pub enum EnrichError {
    #[error("diff unparseable: {0}")]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, Copy)]
pub struct EnrichOptions {
    /// Context width used when regenerating the comment-stripped diff.
    pub context_width: usize,
    /// Include the full enclosure chain instead of only the innermost
    /// construct.
    pub full_enclosure_chain: bool,
}

impl Default for EnrichOptions {
    fn default() -> Self {
        EnrichOptions {
            context_width: 3,
            full_enclosure_chain: false,
        }
    }
}

/// Enrich one commit record at the given level, resolving file snapshots
/// through `store`. The record's diff must parse; everything else degrades
/// per file with fallback flags.
pub fn enrich_commit(
    record: &CommitRecord,
    store: &SnapshotStore,
    level: EnrichmentLevel,
) -> Result<EnrichedDiff, EnrichError> {
    enrich_commit_with(record, store, level, EnrichOptions::default())
}

pub fn enrich_commit_with(
    record: &CommitRecord,
    store: &SnapshotStore,
    level: EnrichmentLevel,
    options: EnrichOptions,
) -> Result<EnrichedDiff, EnrichError> {
    let contents = store.for_commit(&record.repo, &record.sha);
    enrich_diff(&record.diff, &contents, level, options)
}

/// Core enrichment over a raw diff text and a pre/post content source.
pub fn enrich_diff(
    diff_text: &str,
    contents: &dyn FileContents,
    level: EnrichmentLevel,
    options: EnrichOptions,
) -> Result<EnrichedDiff, EnrichError> {
    let raw = parse_unified_diff(diff_text, None)?;
    let mut out = EnrichedDiff {
        message: None,
        level,
        files: Vec::new(),
        fallback_files: 0,
    };
    for file in &raw.files {
        out.files.push(enrich_file(file, contents, level, options, &mut out.fallback_files));
    }
    Ok(out)
}

fn enrich_file(
    file: &FileDiff,
    contents: &dyn FileContents,
    level: EnrichmentLevel,
    options: EnrichOptions,
    fallback_files: &mut usize,
) -> EnrichedFile {
    let mut enriched = EnrichedFile {
        old_path: file.old_path.clone(),
        new_path: file.new_path.clone(),
        sections: Vec::new(),
    };

    let plan: Result<(String, String), ()> = (|| {
        if file.is_binary {
            return Err(());
        }
        let language = Language::from_path(effective_path(file)).ok_or(())?;
        let pre = side_content(contents, &file.old_path, Side::Pre).ok_or(())?;
        let post = side_content(contents, &file.new_path, Side::Post).ok_or(())?;
        let (pre_s, post_s) = strip_comments(&pre, &post, language).map_err(|_| ())?;
        Ok((pre_s, post_s))
    })();

    let Ok((pre_s, post_s)) = plan else {
        *fallback_files += 1;
        if !file.hunks.is_empty() {
            enriched.sections.push(fallback_section(file));
        } else {
            enriched.sections.push(EnrichedSection {
                function: None,
                fallback: true,
                lines: Vec::new(),
            });
        }
        return enriched;
    };

    // Regenerate the diff over the stripped versions; the edit script and
    // the rendered hunks come from the same deterministic diff.
    let stripped_file = compute_unified_diff_with_paths(
        &pre_s,
        &post_s,
        options.context_width,
        &file.old_path,
        &file.new_path,
    );
    if stripped_file.hunks.is_empty() {
        // Comment-only (or whitespace-only) change: nothing to enrich.
        return enriched;
    }
    let single = CommitDiff {
        files: vec![stripped_file],
        trailing_newline: true,
        ..CommitDiff::default()
    };
    let mut mem = MemoryContents::default();
    mem.pre.insert(file.old_path.clone(), pre_s.clone());
    mem.post.insert(file.new_path.clone(), post_s.clone());
    let found = changed_functions(&single, &mem);

    let pre_lines: Vec<&str> = split_lines(&pre_s);
    let post_lines: Vec<&str> = split_lines(&post_s);
    let edits = diff_lines(&pre_lines, &post_lines);

    let mut pairs: Vec<&FunctionPair> = found.pairs.iter().collect();
    pairs.sort_by_key(|p| {
        p.post
            .as_ref()
            .map(|v| v.start_line)
            .or_else(|| p.pre.as_ref().map(|v| v.start_line))
            .unwrap_or(0)
    });

    let mut emitted_old: HashSet<usize> = HashSet::new();
    let mut emitted_new: HashSet<usize> = HashSet::new();
    for pair in pairs {
        let section = enrich_function(
            pair,
            &edits,
            &pre_lines,
            &post_lines,
            level,
            options,
            &mut emitted_old,
            &mut emitted_new,
        );
        if !section.lines.is_empty() {
            enriched.sections.push(section);
        }
    }

    // Changed lines outside every touched function (global declarations
    // and similar) are carried through as a residual section.
    let mut residual = EnrichedSection {
        function: None,
        fallback: false,
        lines: Vec::new(),
    };
    for edit in &edits {
        match *edit {
            LineEdit::Delete { old } if !emitted_old.contains(&old) => {
                residual.lines.push(EnrichedLine {
                    tag: LineTag::ChangedDel,
                    text: pre_lines[old].to_string(),
                    old_lineno: Some(old as u32 + 1),
                    new_lineno: None,
                    provenance: vec![Provenance::Residual],
                });
            }
            LineEdit::Insert { new } if !emitted_new.contains(&new) => {
                residual.lines.push(EnrichedLine {
                    tag: LineTag::ChangedAdd,
                    text: post_lines[new].to_string(),
                    old_lineno: None,
                    new_lineno: Some(new as u32 + 1),
                    provenance: vec![Provenance::Residual],
                });
            }
            _ => {}
        }
    }
    if !residual.lines.is_empty() {
        enriched.sections.push(residual);
    }
    enriched
}

/// Per-statement context provenance for one side of a pair.
struct SideContext {
    /// 0-based file line -> provenance set, for selected context lines.
    line_provenance: BTreeMap<usize, Vec<Provenance>>,
    /// Lines of the enclosure-selected statements (tag precedence).
    control_lines: HashSet<usize>,
    /// Function line span in the stripped file.
    span: Option<(usize, usize)>,
}

impl SideContext {
    fn empty() -> Self {
        SideContext {
            line_provenance: BTreeMap::new(),
            control_lines: HashSet::new(),
            span: None,
        }
    }
}

fn side_context(
    version: Option<&crate::syntax::FunctionVersion>,
    seeds: &StatementSet,
    level: EnrichmentLevel,
    options: EnrichOptions,
) -> SideContext {
    let Some(version) = version else {
        return SideContext::empty();
    };
    let ir = &version.ir;
    let depth = level.depth();
    let backward = backward_slice_depths(seeds, ir, depth);
    let forward = forward_slice_depths(seeds, ir, depth);

    // Enclosures apply to the changed statements and, beyond level cf, to
    // the sliced statements as well.
    let mut enclosure_input = seeds.clone();
    enclosure_input.ids.extend(backward.keys().copied());
    enclosure_input.ids.extend(forward.keys().copied());
    let enclosures = if options.full_enclosure_chain {
        control_flow_enclosure_chain(&enclosure_input, ir)
    } else {
        control_flow_enclosure(&enclosure_input, ir)
    };

    let mut ctx = SideContext {
        line_provenance: BTreeMap::new(),
        control_lines: HashSet::new(),
        span: Some((version.start_line, version.end_line)),
    };
    let mut add = |id: usize, prov: Provenance, control: bool| {
        let stmt = &ir.statements[id];
        for line in stmt.start_line..=stmt.end_line {
            let file_line = version.start_line + line;
            let provs = ctx.line_provenance.entry(file_line).or_default();
            if !provs.contains(&prov) {
                provs.push(prov);
            }
            if control {
                ctx.control_lines.insert(file_line);
            }
        }
    };
    for (&id, &d) in &backward {
        if !seeds.ids.contains(&id) {
            add(id, Provenance::Backward { depth: d }, false);
        }
    }
    for (&id, &d) in &forward {
        if !seeds.ids.contains(&id) {
            add(id, Provenance::Forward { depth: d }, false);
        }
    }
    for &id in &enclosures.ids {
        if !seeds.ids.contains(&id) {
            add(id, Provenance::Enclosure, true);
        }
    }
    ctx
}

#[allow(clippy::too_many_arguments)]
fn enrich_function(
    pair: &FunctionPair,
    edits: &[LineEdit],
    pre_lines: &[&str],
    post_lines: &[&str],
    level: EnrichmentLevel,
    options: EnrichOptions,
    emitted_old: &mut HashSet<usize>,
    emitted_new: &mut HashSet<usize>,
) -> EnrichedSection {
    // Changed statement seeds per side: from the structural diff when both
    // versions exist, otherwise every statement of the present side.
    let (pre_seeds, post_seeds) = match (&pair.pre, &pair.post) {
        (Some(pre), Some(post)) => {
            let mapping = match_trees(&pre.tree, &post.tree);
            changed_statements(&mapping, &pre.tree, &pre.ir, &post.tree, &post.ir)
        }
        (Some(pre), None) => (
            StatementSet::from_ids(Side::Pre, 0..pre.ir.len()),
            StatementSet::empty(Side::Post),
        ),
        (None, Some(post)) => (
            StatementSet::empty(Side::Pre),
            StatementSet::from_ids(Side::Post, 0..post.ir.len()),
        ),
        (None, None) => (
            StatementSet::empty(Side::Pre),
            StatementSet::empty(Side::Post),
        ),
    };

    let pre_ctx = side_context(pair.pre.as_ref(), &pre_seeds, level, options);
    let post_ctx = side_context(pair.post.as_ref(), &post_seeds, level, options);

    let in_span = |span: Option<(usize, usize)>, line: usize| {
        span.is_some_and(|(s, e)| s <= line && line <= e)
    };

    let mut section = EnrichedSection {
        function: Some(pair.name.clone()),
        fallback: false,
        lines: Vec::new(),
    };
    for edit in edits {
        match *edit {
            LineEdit::Delete { old } => {
                if in_span(pre_ctx.span, old) && !emitted_old.contains(&old) {
                    emitted_old.insert(old);
                    section.lines.push(EnrichedLine {
                        tag: LineTag::ChangedDel,
                        text: pre_lines[old].to_string(),
                        old_lineno: Some(old as u32 + 1),
                        new_lineno: None,
                        provenance: Vec::new(),
                    });
                }
            }
            LineEdit::Insert { new } => {
                if in_span(post_ctx.span, new) && !emitted_new.contains(&new) {
                    emitted_new.insert(new);
                    section.lines.push(EnrichedLine {
                        tag: LineTag::ChangedAdd,
                        text: post_lines[new].to_string(),
                        old_lineno: None,
                        new_lineno: Some(new as u32 + 1),
                        provenance: Vec::new(),
                    });
                }
            }
            LineEdit::Keep { old, new } => {
                let mut provenance: Vec<Provenance> = Vec::new();
                if let Some(p) = pre_ctx.line_provenance.get(&old) {
                    provenance.extend(p.iter().copied());
                }
                if let Some(p) = post_ctx.line_provenance.get(&new) {
                    for prov in p {
                        if !provenance.contains(prov) {
                            provenance.push(*prov);
                        }
                    }
                }
                if provenance.is_empty() {
                    continue;
                }
                let control =
                    pre_ctx.control_lines.contains(&old) || post_ctx.control_lines.contains(&new);
                section.lines.push(EnrichedLine {
                    tag: if control {
                        LineTag::CtxControl
                    } else {
                        LineTag::CtxDataflow
                    },
                    text: post_lines[new].to_string(),
                    old_lineno: Some(old as u32 + 1),
                    new_lineno: Some(new as u32 + 1),
                    provenance,
                });
            }
        }
    }
    section
}

/// Raw hunks carried through unchanged for files that cannot be analyzed.
fn fallback_section(file: &FileDiff) -> EnrichedSection {
    let mut section = EnrichedSection {
        function: None,
        fallback: true,
        lines: Vec::new(),
    };
    for hunk in &file.hunks {
        for line in &hunk.lines {
            let tag = match line.kind {
                LineKind::Added => LineTag::ChangedAdd,
                LineKind::Deleted => LineTag::ChangedDel,
                LineKind::Context => LineTag::CtxRaw,
                LineKind::Header | LineKind::Message => LineTag::Header,
            };
            section.lines.push(EnrichedLine {
                tag,
                text: line.text.clone(),
                old_lineno: line.old_lineno,
                new_lineno: line.new_lineno,
                provenance: vec![Provenance::Fallback],
            });
        }
    }
    section
}

fn effective_path(file: &FileDiff) -> &str {
    if file.new_path.is_empty() || file.new_path == "/dev/null" {
        &file.old_path
    } else {
        &file.new_path
    }
}

fn side_content(contents: &dyn FileContents, path: &str, side: Side) -> Option<String> {
    if path == "/dev/null" || path.is_empty() {
        return Some(String::new());
    }
    match side {
        Side::Pre => contents.pre(path),
        Side::Post => contents.post(path),
    }
}

fn split_lines(text: &str) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    let mut lines: Vec<&str> = text.split('\n').collect();
    if text.ends_with('\n') {
        lines.pop();
    }
    lines
}
