//! Owned arena representation of a concrete syntax tree.
//!
//! Trees are converted out of tree-sitter at parse time so that everything
//! downstream (matching, IR construction) works on a plain, self-contained
//! value. Nodes are stored in pre-order; ids are indexes into the arena.

use std::ops::Range;

use super::{Language, SyntaxError};

/// Index of a node within its [`SyntaxTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NodeData {
    pub kind: &'static str,
    pub byte_range: Range<usize>,
    /// 0-based line span, inclusive on both ends.
    pub start_line: usize,
    pub end_line: usize,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    pub is_named: bool,
    pub is_error: bool,
    /// Number of proper descendants.
    pub descendants: usize,
    /// Height of the subtree rooted here; leaves have height 1.
    pub height: usize,
}

/// A full-fidelity parse tree (punctuation and comments included) of one
/// file or function version.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    pub language: Language,
    source: String,
    nodes: Vec<NodeData>,
    has_errors: bool,
}

pub(super) fn parse(text: &str, language: Language) -> Result<SyntaxTree, SyntaxError> {
    let mut parser = tree_sitter::Parser::new();
    parser
        .set_language(&language.grammar())
        .map_err(|_| SyntaxError::UnsupportedLanguage(format!("{language:?}")))?;
    let ts_tree = parser
        .parse(text, None)
        .ok_or(SyntaxError::ParserFailure)?;

    let mut nodes: Vec<NodeData> = Vec::new();
    let mut has_errors = false;
    // Iterative pre-order walk; parents are pushed before their children.
    let mut stack: Vec<(tree_sitter::Node, Option<NodeId>)> = vec![(ts_tree.root_node(), None)];
    while let Some((node, parent)) = stack.pop() {
        let id = NodeId(nodes.len() as u32);
        let is_error = node.is_error() || node.is_missing();
        has_errors |= is_error;
        nodes.push(NodeData {
            kind: node.kind(),
            byte_range: node.start_byte()..node.end_byte(),
            start_line: node.start_position().row,
            end_line: node.end_position().row,
            children: Vec::new(),
            parent,
            is_named: node.is_named(),
            is_error,
            descendants: 0,
            height: 1,
        });
        if let Some(p) = parent {
            nodes[p.index()].children.push(id);
        }
        // Push children in reverse so they pop in source order.
        for i in (0..node.child_count()).rev() {
            if let Some(child) = node.child(i) {
                stack.push((child, Some(id)));
            }
        }
    }
    // Pre-order storage means children always follow their parent, so a
    // reverse sweep computes sizes and heights bottom-up.
    for i in (0..nodes.len()).rev() {
        let (desc, height) = {
            let n = &nodes[i];
            let mut desc = 0;
            let mut height = 1;
            for &c in &n.children {
                desc += nodes[c.index()].descendants + 1;
                height = height.max(nodes[c.index()].height + 1);
            }
            (desc, height)
        };
        nodes[i].descendants = desc;
        nodes[i].height = height;
    }
    Ok(SyntaxTree {
        language,
        source: text.to_string(),
        nodes,
        has_errors,
    })
}

impl SyntaxTree {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Whether the parse produced any error or missing nodes.
    pub fn has_errors(&self) -> bool {
        self.has_errors
    }

    pub fn kind(&self, id: NodeId) -> &'static str {
        self.nodes[id.index()].kind
    }

    pub fn byte_range(&self, id: NodeId) -> Range<usize> {
        self.nodes[id.index()].byte_range.clone()
    }

    /// 0-based inclusive line span.
    pub fn line_span(&self, id: NodeId) -> (usize, usize) {
        let n = &self.nodes[id.index()];
        (n.start_line, n.end_line)
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn is_named(&self, id: NodeId) -> bool {
        self.nodes[id.index()].is_named
    }

    pub fn is_error(&self, id: NodeId) -> bool {
        self.nodes[id.index()].is_error
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id.index()].children.is_empty()
    }

    pub fn text(&self, id: NodeId) -> &str {
        let r = self.byte_range(id);
        &self.source[r.start.min(self.source.len())..r.end.min(self.source.len())]
    }

    /// Number of proper descendants of `id`.
    pub fn descendant_count(&self, id: NodeId) -> usize {
        self.nodes[id.index()].descendants
    }

    /// Height of the subtree rooted at `id` (leaves are height 1).
    pub fn height(&self, id: NodeId) -> usize {
        self.nodes[id.index()].height
    }

    /// All node ids in pre-order.
    pub fn pre_order(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Ids of the subtree rooted at `id`, in pre-order. Pre-order storage
    /// makes a subtree a contiguous id range.
    pub fn subtree(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let start = id.0;
        let end = start + self.nodes[id.index()].descendants as u32 + 1;
        (start..end).map(NodeId)
    }

    /// First child of `id` with the given kind.
    pub fn child_by_kind(&self, id: NodeId, kind: &str) -> Option<NodeId> {
        self.children(id)
            .iter()
            .copied()
            .find(|&c| self.kind(c) == kind)
    }

    /// First node of the given kind found by pre-order DFS under `id`.
    pub fn find_descendant(&self, id: NodeId, kind: &str) -> Option<NodeId> {
        self.subtree(id).find(|&n| n != id && self.kind(n) == kind)
    }
}
