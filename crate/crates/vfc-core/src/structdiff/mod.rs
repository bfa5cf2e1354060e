//! Structural correspondence between pre/post syntax trees and extraction
//! of the statements they change.

mod matching;

pub use matching::{match_trees, MatchParams};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::syntax::{NodeId, StatementIR, SyntaxTree};

/// Which version of a function a value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Pre,
    Post,
}

/// Edit operations derived from the mapping: one `Delete`/`Insert` per
/// unmatched node, `Update` for matched leaves whose text differs, `Move`
/// for matched pairs whose parents do not correspond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditAction {
    Insert(NodeId),
    Delete(NodeId),
    Update(NodeId, NodeId),
    Move(NodeId, NodeId),
}

/// Node correspondence between two trees plus the derived edit actions.
#[derive(Debug, Clone, Default)]
pub struct EditMapping {
    /// Matched pairs, ordered by pre-side node id. Each node appears in at
    /// most one pair and paired nodes have identical kind.
    pub pairs: Vec<(NodeId, NodeId)>,
    pub actions: Vec<EditAction>,
}

impl EditMapping {
    pub fn post_of(&self, pre: NodeId) -> Option<NodeId> {
        self.pairs
            .binary_search_by_key(&pre, |&(a, _)| a)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn pre_of(&self, post: NodeId) -> Option<NodeId> {
        self.pairs.iter().find(|&&(_, b)| b == post).map(|p| p.0)
    }

    pub fn is_total_identity(&self) -> bool {
        self.actions.is_empty()
    }

    /// Render actions as structured text for fixture debugging.
    pub fn dump_actions(&self, pre: &SyntaxTree, post: &SyntaxTree) -> String {
        let mut out = String::new();
        for action in &self.actions {
            let line = match *action {
                EditAction::Insert(n) => format!("insert {} {:?}", post.kind(n), post.text(n)),
                EditAction::Delete(n) => format!("delete {} {:?}", pre.kind(n), pre.text(n)),
                EditAction::Update(a, b) => format!(
                    "update {} {:?} -> {:?}",
                    pre.kind(a),
                    pre.text(a),
                    post.text(b)
                ),
                EditAction::Move(a, _) => format!("move {} {:?}", pre.kind(a), pre.text(a)),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// A set of statement ids on one side of a function pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementSet {
    pub side: Side,
    pub ids: BTreeSet<usize>,
}

impl StatementSet {
    pub fn empty(side: Side) -> Self {
        StatementSet {
            side,
            ids: BTreeSet::new(),
        }
    }

    pub fn from_ids(side: Side, ids: impl IntoIterator<Item = usize>) -> Self {
        StatementSet {
            side,
            ids: ids.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Derive the changed statement sets of both sides: a statement is changed
/// iff its span contains a node named in an edit action on its side;
/// `Update` and `Move` mark both sides.
pub fn changed_statements(
    mapping: &EditMapping,
    pre_tree: &SyntaxTree,
    pre_ir: &StatementIR,
    post_tree: &SyntaxTree,
    post_ir: &StatementIR,
) -> (StatementSet, StatementSet) {
    let mut pre_set = StatementSet::empty(Side::Pre);
    let mut post_set = StatementSet::empty(Side::Post);
    for action in &mapping.actions {
        match *action {
            EditAction::Delete(n) => {
                if let Some(id) = pre_ir.statement_containing(&pre_tree.byte_range(n)) {
                    pre_set.ids.insert(id);
                }
            }
            EditAction::Insert(n) => {
                if let Some(id) = post_ir.statement_containing(&post_tree.byte_range(n)) {
                    post_set.ids.insert(id);
                }
            }
            EditAction::Update(a, b) | EditAction::Move(a, b) => {
                if let Some(id) = pre_ir.statement_containing(&pre_tree.byte_range(a)) {
                    pre_set.ids.insert(id);
                }
                if let Some(id) = post_ir.statement_containing(&post_tree.byte_range(b)) {
                    post_set.ids.insert(id);
                }
            }
        }
    }
    (pre_set, post_set)
}
