//! Statement-level intermediate representation with read/write variable
//! sets and control enclosures.
//!
//! Granularity: expression statements, declarations, jumps, and control
//! headers are statements; compound blocks, labels, and case labels are
//! containers. Read/write extraction is purely syntactic: assignment
//! targets, `++`/`--` operands, and declarators with initializers count as
//! writes; address-of arguments count as both read and write; bases of
//! subscript/field/dereference stores count as both. Plain-identifier
//! callees are function designators, not variable uses, and are skipped.
//! Preprocessor directives and parse-error regions become opaque
//! statements with empty read/write sets.

use std::collections::BTreeSet;
use std::ops::Range;

use super::tree::{NodeId, SyntaxTree};

/// One statement of a function, annotated for slicing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementEntry {
    /// Dense id, 0..n-1 in source order.
    pub id: usize,
    /// The statement node in the originating tree (the construct node for
    /// control headers).
    pub node: NodeId,
    /// Byte span; for control headers this covers only the header part
    /// (keyword through closing condition), not the body.
    pub byte_range: Range<usize>,
    /// 0-based inclusive line span within the parsed source.
    pub start_line: usize,
    pub end_line: usize,
    pub text: String,
    pub reads: BTreeSet<String>,
    pub writes: BTreeSet<String>,
    /// Ids of enclosing control headers, innermost first.
    pub enclosure_chain: Vec<usize>,
    pub is_control_header: bool,
}

/// Ordered statement list of one function version.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatementIR {
    pub statements: Vec<StatementEntry>,
}

impl StatementIR {
    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Id of the statement whose span contains the given byte range, if
    /// any. Statement spans are pairwise disjoint.
    pub fn statement_containing(&self, range: &Range<usize>) -> Option<usize> {
        self.statements
            .iter()
            .find(|s| s.byte_range.start <= range.start && range.end <= s.byte_range.end)
            .map(|s| s.id)
    }
}

const SIMPLE_STATEMENTS: &[&str] = &[
    "expression_statement",
    "declaration",
    "return_statement",
    "break_statement",
    "continue_statement",
    "goto_statement",
    "throw_statement",
];

const CONTROL_CONSTRUCTS: &[&str] = &[
    "if_statement",
    "while_statement",
    "for_statement",
    "do_statement",
    "switch_statement",
    "for_range_loop",
];

const OPAQUE_STATEMENTS: &[&str] = &[
    "preproc_include",
    "preproc_def",
    "preproc_function_def",
    "preproc_call",
    "ERROR",
];

/// Build the statement IR of a parsed function (or file) version.
pub fn build_statement_ir(tree: &SyntaxTree) -> StatementIR {
    let mut builder = IrBuilder {
        tree,
        ir: StatementIR::default(),
        enclosures: Vec::new(),
    };
    builder.walk(tree.root());
    builder.ir
}

struct IrBuilder<'a> {
    tree: &'a SyntaxTree,
    ir: StatementIR,
    enclosures: Vec<usize>,
}

impl<'a> IrBuilder<'a> {
    fn walk(&mut self, node: NodeId) {
        let kind = self.tree.kind(node);
        if SIMPLE_STATEMENTS.contains(&kind) {
            let mut reads = BTreeSet::new();
            let mut writes = BTreeSet::new();
            collect_rw(self.tree, node, &mut reads, &mut writes);
            self.push_entry(node, self.tree.byte_range(node), reads, writes, false);
        } else if CONTROL_CONSTRUCTS.contains(&kind) {
            self.walk_control(node, kind);
        } else if OPAQUE_STATEMENTS.contains(&kind) {
            self.push_entry(
                node,
                self.tree.byte_range(node),
                BTreeSet::new(),
                BTreeSet::new(),
                false,
            );
        } else {
            for &child in self.tree.children(node) {
                self.walk(child);
            }
        }
    }

    fn walk_control(&mut self, node: NodeId, kind: &str) {
        let tree = self.tree;
        let full = tree.byte_range(node);
        // Header region: keyword through the end of the condition part.
        let (header_end, body_children): (usize, Vec<NodeId>) = match kind {
            "if_statement" | "while_statement" | "switch_statement" => {
                let cond = tree
                    .child_by_kind(node, "parenthesized_expression")
                    .or_else(|| tree.child_by_kind(node, "condition_clause"));
                let end = cond.map(|c| tree.byte_range(c).end).unwrap_or(full.end);
                let body = tree
                    .children(node)
                    .iter()
                    .copied()
                    .filter(|&c| tree.byte_range(c).start >= end)
                    .collect();
                (end, body)
            }
            "for_statement" | "for_range_loop" => {
                let close = tree
                    .children(node)
                    .iter()
                    .copied()
                    .find(|&c| tree.kind(c) == ")");
                let end = close.map(|c| tree.byte_range(c).end).unwrap_or(full.end);
                let body = tree
                    .children(node)
                    .iter()
                    .copied()
                    .filter(|&c| tree.byte_range(c).start >= end)
                    .collect();
                (end, body)
            }
            "do_statement" => {
                // Header is just the `do` keyword; condition reads still
                // belong to the header entry.
                let kw_end = tree
                    .children(node)
                    .first()
                    .map(|&c| tree.byte_range(c).end)
                    .unwrap_or(full.start);
                let body = tree
                    .children(node)
                    .iter()
                    .copied()
                    .filter(|&c| {
                        !matches!(
                            tree.kind(c),
                            "do" | "while" | "parenthesized_expression" | "condition_clause" | ";"
                        )
                    })
                    .collect();
                (kw_end, body)
            }
            _ => unreachable!("not a control construct"),
        };

        let mut reads = BTreeSet::new();
        let mut writes = BTreeSet::new();
        // Everything inside the header region feeds the header entry; for
        // do-while the trailing condition does as well.
        for &child in tree.children(node) {
            let r = tree.byte_range(child);
            let in_header = r.start < header_end && r.start > full.start || kind == "do_statement";
            let is_cond_tail = kind == "do_statement"
                && matches!(tree.kind(child), "parenthesized_expression" | "condition_clause");
            if (in_header && r.end <= header_end) || is_cond_tail {
                collect_rw(tree, child, &mut reads, &mut writes);
            }
        }

        let header_id = self.push_entry(node, full.start..header_end, reads, writes, true);
        self.enclosures.push(header_id);
        for child in body_children {
            self.walk(child);
        }
        self.enclosures.pop();
    }

    fn push_entry(
        &mut self,
        node: NodeId,
        byte_range: Range<usize>,
        reads: BTreeSet<String>,
        writes: BTreeSet<String>,
        is_control_header: bool,
    ) -> usize {
        let id = self.ir.statements.len();
        let src = self.tree.source();
        let text = src[byte_range.start.min(src.len())..byte_range.end.min(src.len())].to_string();
        let start_line = src[..byte_range.start.min(src.len())]
            .bytes()
            .filter(|&b| b == b'\n')
            .count();
        let end_line = start_line
            + text.bytes().filter(|&b| b == b'\n').count();
        self.ir.statements.push(StatementEntry {
            id,
            node,
            byte_range,
            start_line,
            end_line,
            text,
            reads,
            writes,
            enclosure_chain: self.enclosures.iter().rev().copied().collect(),
            is_control_header,
        });
        id
    }
}

/// Collect read/write identifier sets for an expression or statement node.
fn collect_rw(
    tree: &SyntaxTree,
    node: NodeId,
    reads: &mut BTreeSet<String>,
    writes: &mut BTreeSet<String>,
) {
    match tree.kind(node) {
        "identifier" => {
            reads.insert(tree.text(node).to_string());
        }
        "comment" => {}
        "assignment_expression" => {
            let children = tree.children(node);
            if let (Some(&left), Some(&right)) = (children.first(), children.last()) {
                let compound = children
                    .iter()
                    .any(|&c| tree.is_leaf(c) && tree.kind(c) != "=" && tree.text(c).ends_with('='));
                collect_lvalue(tree, left, reads, writes, compound);
                collect_rw(tree, right, reads, writes);
            }
        }
        "update_expression" => {
            for &child in tree.children(node) {
                if tree.is_named(child) {
                    collect_lvalue(tree, child, reads, writes, true);
                }
            }
        }
        "init_declarator" => {
            let children = tree.children(node);
            if let Some(&decl) = children.first() {
                declare_write(tree, decl, reads, writes);
            }
            // Skip declarator and `=`; the rest is the initializer.
            for &child in children.iter().skip(2) {
                collect_rw(tree, child, reads, writes);
            }
        }
        "declaration" => {
            for &child in tree.children(node) {
                match tree.kind(child) {
                    "init_declarator" => collect_rw(tree, child, reads, writes),
                    // Declarators without initializers do not count as
                    // writes; array sizes inside them are still reads.
                    "identifier" => {}
                    "array_declarator" | "pointer_declarator" | "function_declarator" => {
                        collect_inner_reads_skipping_name(tree, child, reads, writes);
                    }
                    _ => {}
                }
            }
        }
        "call_expression" => {
            let children = tree.children(node);
            if let Some(&callee) = children.first() {
                // Plain-identifier callees are skipped; anything else (a
                // member access, dereferenced pointer, ...) is evaluated.
                if tree.kind(callee) != "identifier" {
                    collect_rw(tree, callee, reads, writes);
                }
            }
            if let Some(args) = tree.child_by_kind(node, "argument_list") {
                for &arg in tree.children(args) {
                    if !tree.is_named(arg) {
                        continue;
                    }
                    if is_address_of(tree, arg) {
                        // Address-of arguments may be written by the callee.
                        mark_base(tree, arg, reads, writes);
                    } else {
                        collect_rw(tree, arg, reads, writes);
                    }
                }
            }
        }
        "field_expression" => {
            // Only the base object is a variable use.
            if let Some(&base) = tree.children(node).first() {
                collect_rw(tree, base, reads, writes);
            }
        }
        "field_identifier" | "type_identifier" | "statement_identifier" => {}
        _ => {
            for &child in tree.children(node) {
                collect_rw(tree, child, reads, writes);
            }
        }
    }
}

/// Handle the left side of an assignment. `also_read` marks compound
/// assignments (`+=` etc.) where the target is read as well.
fn collect_lvalue(
    tree: &SyntaxTree,
    node: NodeId,
    reads: &mut BTreeSet<String>,
    writes: &mut BTreeSet<String>,
    also_read: bool,
) {
    match tree.kind(node) {
        "identifier" => {
            writes.insert(tree.text(node).to_string());
            if also_read {
                reads.insert(tree.text(node).to_string());
            }
        }
        "subscript_expression" => {
            let children: Vec<NodeId> =
                tree.children(node).iter().copied().filter(|&c| tree.is_named(c)).collect();
            if let Some(&base) = children.first() {
                mark_base(tree, base, reads, writes);
            }
            for &idx in children.iter().skip(1) {
                collect_rw(tree, idx, reads, writes);
            }
        }
        "field_expression" | "pointer_expression" | "unary_expression" => {
            // Stores through a member, deref, or unary wrap read and write
            // the base object.
            mark_base(tree, node, reads, writes);
        }
        "parenthesized_expression" => {
            for &child in tree.children(node) {
                if tree.is_named(child) {
                    collect_lvalue(tree, child, reads, writes, also_read);
                }
            }
        }
        _ => collect_rw(tree, node, reads, writes),
    }
}

/// Mark the leftmost base identifier of a postfix/unary chain as both read
/// and written; other identifiers along the chain (indexes) are reads.
fn mark_base(
    tree: &SyntaxTree,
    node: NodeId,
    reads: &mut BTreeSet<String>,
    writes: &mut BTreeSet<String>,
) {
    match tree.kind(node) {
        "identifier" => {
            reads.insert(tree.text(node).to_string());
            writes.insert(tree.text(node).to_string());
        }
        "subscript_expression" => {
            let named: Vec<NodeId> =
                tree.children(node).iter().copied().filter(|&c| tree.is_named(c)).collect();
            if let Some(&base) = named.first() {
                mark_base(tree, base, reads, writes);
            }
            for &idx in named.iter().skip(1) {
                collect_rw(tree, idx, reads, writes);
            }
        }
        "field_expression" | "parenthesized_expression" | "pointer_expression"
        | "unary_expression" => {
            if let Some(&base) = tree
                .children(node)
                .iter()
                .find(|&&c| tree.is_named(c))
            {
                mark_base(tree, base, reads, writes);
            }
        }
        _ => collect_rw(tree, node, reads, writes),
    }
}

/// `&x` style argument detection.
fn is_address_of(tree: &SyntaxTree, node: NodeId) -> bool {
    matches!(tree.kind(node), "pointer_expression" | "unary_expression")
        && tree
            .children(node)
            .first()
            .map(|&c| tree.text(c) == "&")
            .unwrap_or(false)
}

/// The declared identifier of a declarator subtree becomes a write; other
/// identifiers inside (array sizes) are reads.
fn declare_write(
    tree: &SyntaxTree,
    declarator: NodeId,
    reads: &mut BTreeSet<String>,
    writes: &mut BTreeSet<String>,
) {
    let mut name: Option<NodeId> = None;
    for n in tree.subtree(declarator) {
        if tree.kind(n) == "identifier" {
            name = Some(n);
            break;
        }
    }
    if let Some(n) = name {
        writes.insert(tree.text(n).to_string());
        for other in tree.subtree(declarator) {
            if other != n && tree.kind(other) == "identifier" {
                reads.insert(tree.text(other).to_string());
            }
        }
    }
}

fn collect_inner_reads_skipping_name(
    tree: &SyntaxTree,
    declarator: NodeId,
    reads: &mut BTreeSet<String>,
    _writes: &mut BTreeSet<String>,
) {
    let mut first = true;
    for n in tree.subtree(declarator) {
        if tree.kind(n) == "identifier" {
            if first {
                first = false;
            } else {
                reads.insert(tree.text(n).to_string());
            }
        }
    }
}
