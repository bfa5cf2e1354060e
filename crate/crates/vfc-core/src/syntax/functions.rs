//! Locate the functions touched by a diff and prepare both versions for
//! structural comparison.

use std::collections::BTreeMap;
use std::collections::HashMap;

use super::ir::{build_statement_ir, StatementIR};
use super::tree::SyntaxTree;
use super::{parse_source, Language};
use crate::diff::CommitDiff;

/// Supplies pre/post file contents for the paths named by a diff.
pub trait FileContents {
    fn pre(&self, path: &str) -> Option<String>;
    fn post(&self, path: &str) -> Option<String>;
}

/// In-memory contents, keyed by path. Used by tests and by callers that
/// have already materialized both snapshots.
#[derive(Debug, Default, Clone)]
pub struct MemoryContents {
    pub pre: HashMap<String, String>,
    pub post: HashMap<String, String>,
}

impl MemoryContents {
    pub fn single(path: &str, pre: &str, post: &str) -> Self {
        let mut c = MemoryContents::default();
        c.pre.insert(path.to_string(), pre.to_string());
        c.post.insert(path.to_string(), post.to_string());
        c
    }
}

impl FileContents for MemoryContents {
    fn pre(&self, path: &str) -> Option<String> {
        self.pre.get(path).cloned()
    }
    fn post(&self, path: &str) -> Option<String> {
        self.post.get(path).cloned()
    }
}

/// One side of a function pair: its standalone parse and statement IR,
/// plus the 0-based file line where the function starts.
#[derive(Debug, Clone)]
pub struct FunctionVersion {
    pub tree: SyntaxTree,
    pub ir: StatementIR,
    pub start_line: usize,
    pub end_line: usize,
}

/// A function whose line span intersects the changed lines of a diff, with
/// whichever versions exist. At least one side is present.
#[derive(Debug, Clone)]
pub struct FunctionPair {
    pub name: String,
    pub file_index: usize,
    pub pre: Option<FunctionVersion>,
    pub post: Option<FunctionVersion>,
}

/// A hunk whose changed lines fall outside every function on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidualHunk {
    pub file_index: usize,
    pub hunk_index: usize,
}

/// Why a file could not be analyzed; enrichment degrades to the raw diff
/// for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileFallback {
    UnsupportedLanguage { file_index: usize, path: String },
    MissingPreSnapshot { file_index: usize, path: String },
    MissingPostSnapshot { file_index: usize, path: String },
    Binary { file_index: usize, path: String },
}

impl FileFallback {
    pub fn file_index(&self) -> usize {
        match self {
            FileFallback::UnsupportedLanguage { file_index, .. }
            | FileFallback::MissingPreSnapshot { file_index, .. }
            | FileFallback::MissingPostSnapshot { file_index, .. }
            | FileFallback::Binary { file_index, .. } => *file_index,
        }
    }
}

/// Output of [`changed_functions`].
#[derive(Debug, Default)]
pub struct ChangedFunctions {
    pub pairs: Vec<FunctionPair>,
    pub residual_hunks: Vec<ResidualHunk>,
    pub fallbacks: Vec<FileFallback>,
}

#[derive(Debug, Clone)]
struct FunctionInfo {
    key: String,
    /// 0-based inclusive line span in the file.
    start_line: usize,
    end_line: usize,
    byte_range: std::ops::Range<usize>,
}

/// Find all functions whose line span intersects a hunk's changed lines,
/// pairing pre/post versions by name. Changes outside any function are
/// reported as residual hunks; files that cannot be analyzed produce
/// fallback markers instead of failing.
pub fn changed_functions(diff: &CommitDiff, contents: &dyn FileContents) -> ChangedFunctions {
    let mut out = ChangedFunctions::default();
    for (file_index, file) in diff.files.iter().enumerate() {
        let path = effective_path(&file.old_path, &file.new_path);
        if file.is_binary {
            out.fallbacks.push(FileFallback::Binary {
                file_index,
                path: path.to_string(),
            });
            continue;
        }
        if file.hunks.is_empty() {
            continue;
        }
        let Some(language) = Language::from_path(path) else {
            out.fallbacks.push(FileFallback::UnsupportedLanguage {
                file_index,
                path: path.to_string(),
            });
            continue;
        };
        // A side named /dev/null (file added or deleted) legitimately has
        // no content; a missing snapshot for a real path is a fallback.
        let pre_text = if file.old_path == "/dev/null" || file.old_path.is_empty() {
            Some(String::new())
        } else {
            contents.pre(&file.old_path)
        };
        let Some(pre_text) = pre_text else {
            out.fallbacks.push(FileFallback::MissingPreSnapshot {
                file_index,
                path: file.old_path.clone(),
            });
            continue;
        };
        let post_text = if file.new_path == "/dev/null" || file.new_path.is_empty() {
            Some(String::new())
        } else {
            contents.post(&file.new_path)
        };
        let Some(post_text) = post_text else {
            out.fallbacks.push(FileFallback::MissingPostSnapshot {
                file_index,
                path: file.new_path.clone(),
            });
            continue;
        };

        let (Ok(pre_tree), Ok(post_tree)) = (
            parse_source(&pre_text, language),
            parse_source(&post_text, language),
        ) else {
            out.fallbacks.push(FileFallback::UnsupportedLanguage {
                file_index,
                path: path.to_string(),
            });
            continue;
        };

        let pre_fns = list_functions(&pre_tree);
        let post_fns = list_functions(&post_tree);

        let deleted: Vec<usize> = file
            .deleted_line_numbers()
            .iter()
            .map(|&l| l as usize - 1)
            .collect();
        let added: Vec<usize> = file
            .added_line_numbers()
            .iter()
            .map(|&l| l as usize - 1)
            .collect();

        // Union of keys touched on either side.
        let mut touched: BTreeMap<String, ()> = BTreeMap::new();
        for f in pre_fns.values() {
            if deleted.iter().any(|&l| f.start_line <= l && l <= f.end_line) {
                touched.insert(f.key.clone(), ());
            }
        }
        for f in post_fns.values() {
            if added.iter().any(|&l| f.start_line <= l && l <= f.end_line) {
                touched.insert(f.key.clone(), ());
            }
        }

        for key in touched.keys() {
            let pre = pre_fns
                .get(key)
                .and_then(|f| carve(&pre_text, f, language));
            let post = post_fns
                .get(key)
                .and_then(|f| carve(&post_text, f, language));
            if pre.is_none() && post.is_none() {
                continue;
            }
            out.pairs.push(FunctionPair {
                name: key.clone(),
                file_index,
                pre,
                post,
            });
        }

        // Hunks whose changed lines fall outside every function.
        for (hunk_index, hunk) in file.hunks.iter().enumerate() {
            let any_inside = hunk.lines.iter().any(|l| {
                if let Some(old) = l.old_lineno.filter(|_| l.kind == crate::diff::LineKind::Deleted)
                {
                    let l0 = old as usize - 1;
                    if pre_fns
                        .values()
                        .any(|f| f.start_line <= l0 && l0 <= f.end_line)
                    {
                        return true;
                    }
                }
                if let Some(new) = l.new_lineno.filter(|_| l.kind == crate::diff::LineKind::Added) {
                    let l0 = new as usize - 1;
                    if post_fns
                        .values()
                        .any(|f| f.start_line <= l0 && l0 <= f.end_line)
                    {
                        return true;
                    }
                }
                false
            });
            let has_changes = hunk.lines.iter().any(|l| {
                matches!(
                    l.kind,
                    crate::diff::LineKind::Added | crate::diff::LineKind::Deleted
                )
            });
            if has_changes && !any_inside {
                out.residual_hunks.push(ResidualHunk {
                    file_index,
                    hunk_index,
                });
            }
        }
    }
    out
}

fn effective_path<'a>(old: &'a str, new: &'a str) -> &'a str {
    if new.is_empty() || new == "/dev/null" {
        old
    } else {
        new
    }
}

/// Parse a function's text standalone and build its IR.
fn carve(file_text: &str, info: &FunctionInfo, language: Language) -> Option<FunctionVersion> {
    let text = &file_text[info.byte_range.clone()];
    let tree = parse_source(text, language).ok()?;
    let ir = build_statement_ir(&tree);
    Some(FunctionVersion {
        tree,
        ir,
        start_line: info.start_line,
        end_line: info.end_line,
    })
}

/// Function definitions of a file, keyed by declarator name (name plus
/// parameter list when names collide, e.g. C++ overloads).
fn list_functions(tree: &SyntaxTree) -> BTreeMap<String, FunctionInfo> {
    let mut found: Vec<(String, String, FunctionInfo)> = Vec::new();
    for node in tree.pre_order() {
        if tree.kind(node) != "function_definition" {
            continue;
        }
        let Some(declarator) = tree.child_by_kind(node, "function_declarator").or_else(|| {
            // `int *f()` nests the function_declarator under a
            // pointer_declarator.
            tree.children(node)
                .iter()
                .copied()
                .find_map(|c| tree.find_descendant(c, "function_declarator").filter(|_| {
                    matches!(
                        tree.kind(c),
                        "pointer_declarator" | "function_declarator" | "reference_declarator"
                    )
                }))
        }) else {
            continue;
        };
        let name = name_of_declarator(tree, declarator);
        let params = tree
            .child_by_kind(declarator, "parameter_list")
            .map(|p| {
                tree.text(p)
                    .chars()
                    .filter(|c| !c.is_whitespace())
                    .collect::<String>()
            })
            .unwrap_or_default();
        let (start_line, end_line) = tree.line_span(node);
        found.push((
            name,
            params,
            FunctionInfo {
                key: String::new(),
                start_line,
                end_line,
                byte_range: tree.byte_range(node),
            },
        ));
    }
    let mut by_name: HashMap<&str, usize> = HashMap::new();
    for (name, _, _) in &found {
        *by_name.entry(name.as_str()).or_insert(0) += 1;
    }
    let mut map = BTreeMap::new();
    for (name, params, mut info) in found.clone() {
        let key = if by_name[name.as_str()] > 1 {
            format!("{name}{params}")
        } else {
            name.clone()
        };
        info.key = key.clone();
        map.insert(key, info);
    }
    map
}

fn name_of_declarator(tree: &SyntaxTree, declarator: super::NodeId) -> String {
    // The declarator child before the parameter list carries the name;
    // qualified C++ names keep their full text.
    for &child in tree.children(declarator) {
        match tree.kind(child) {
            "identifier" | "field_identifier" | "qualified_identifier"
            | "destructor_name" | "operator_name" => return tree.text(child).to_string(),
            _ => {}
        }
    }
    tree.children(declarator)
        .first()
        .map(|&c| tree.text(c).to_string())
        .unwrap_or_default()
}
