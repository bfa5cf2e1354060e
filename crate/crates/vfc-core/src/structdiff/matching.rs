//! Two-phase tree matching.
//!
//! Phase 1 greedily matches isomorphic subtrees of height at least
//! `min_height`, processing open nodes in descending height order.
//! Ambiguous candidates (several isomorphic subtrees on a side) are
//! tie-broken by minimal start-line distance, then smallest post-order
//! index, so the result is deterministic. Phase 2 matches containers
//! bottom-up when their descendant-overlap (dice) similarity reaches
//! `sim_threshold`, then pairs up remaining children of newly matched
//! containers by kind. There is no optimal edit-distance phase.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::{EditAction, EditMapping};
use crate::syntax::{NodeId, SyntaxTree};

/// Matching parameters. The defaults are the classic ones.
#[derive(Debug, Clone, Copy)]
pub struct MatchParams {
    pub min_height: usize,
    pub sim_threshold: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            min_height: 2,
            sim_threshold: 0.5,
        }
    }
}

/// Match two trees of the same language and derive edit actions.
pub fn match_trees(pre: &SyntaxTree, post: &SyntaxTree) -> EditMapping {
    match_trees_with(pre, post, MatchParams::default())
}

pub fn match_trees_with(pre: &SyntaxTree, post: &SyntaxTree, params: MatchParams) -> EditMapping {
    let mut m = Matcher::new(pre, post, params);
    m.top_down();
    m.bottom_up();
    m.finish()
}

struct Matcher<'a> {
    pre: &'a SyntaxTree,
    post: &'a SyntaxTree,
    params: MatchParams,
    pre_hash: Vec<u64>,
    post_hash: Vec<u64>,
    pre_post_order: Vec<usize>,
    post_post_order: Vec<usize>,
    pre_to_post: HashMap<NodeId, NodeId>,
    post_to_pre: HashMap<NodeId, NodeId>,
}

impl<'a> Matcher<'a> {
    fn new(pre: &'a SyntaxTree, post: &'a SyntaxTree, params: MatchParams) -> Self {
        Matcher {
            pre,
            post,
            params,
            pre_hash: subtree_hashes(pre),
            post_hash: subtree_hashes(post),
            pre_post_order: post_order_index(pre),
            post_post_order: post_order_index(post),
            pre_to_post: HashMap::new(),
            post_to_pre: HashMap::new(),
        }
    }

    fn add_pair(&mut self, a: NodeId, b: NodeId) {
        debug_assert_eq!(self.pre.kind(a), self.post.kind(b));
        self.pre_to_post.insert(a, b);
        self.post_to_pre.insert(b, a);
    }

    /// Match whole isomorphic subtrees by zipping their pre-order ranges.
    fn add_subtree_pair(&mut self, a: NodeId, b: NodeId) {
        let pre_nodes: Vec<NodeId> = self.pre.subtree(a).collect();
        let post_nodes: Vec<NodeId> = self.post.subtree(b).collect();
        debug_assert_eq!(pre_nodes.len(), post_nodes.len());
        for (x, y) in pre_nodes.into_iter().zip(post_nodes) {
            self.add_pair(x, y);
        }
    }

    /// Structural equality check guarding against hash collisions.
    fn isomorphic(&self, a: NodeId, b: NodeId) -> bool {
        if self.pre.descendant_count(a) != self.post.descendant_count(b) {
            return false;
        }
        self.pre.subtree(a).zip(self.post.subtree(b)).all(|(x, y)| {
            self.pre.kind(x) == self.post.kind(y)
                && (!self.pre.is_leaf(x) || self.pre.text(x) == self.post.text(y))
        })
    }

    fn top_down(&mut self) {
        let min_h = self.params.min_height;
        let mut open1: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
        let mut open2: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
        push_open(&mut open1, self.pre, self.pre.root());
        push_open(&mut open2, self.post, self.post.root());

        while let (Some((&h1, _)), Some((&h2, _))) =
            (open1.iter().next_back(), open2.iter().next_back())
        {
            if h1.min(h2) < min_h {
                break;
            }
            if h1 > h2 {
                for n in open1.remove(&h1).unwrap() {
                    open_children(&mut open1, self.pre, n);
                }
                continue;
            }
            if h2 > h1 {
                for n in open2.remove(&h2).unwrap() {
                    open_children(&mut open2, self.post, n);
                }
                continue;
            }
            let level1 = open1.remove(&h1).unwrap();
            let level2 = open2.remove(&h2).unwrap();

            // Group this height level by subtree hash.
            let mut by_hash1: BTreeMap<u64, Vec<NodeId>> = BTreeMap::new();
            let mut by_hash2: BTreeMap<u64, Vec<NodeId>> = BTreeMap::new();
            for n in &level1 {
                by_hash1.entry(self.pre_hash[n.index()]).or_default().push(*n);
            }
            for n in &level2 {
                by_hash2.entry(self.post_hash[n.index()]).or_default().push(*n);
            }

            let mut matched1: HashSet<NodeId> = HashSet::new();
            let mut matched2: HashSet<NodeId> = HashSet::new();
            for (hash, cands1) in &by_hash1 {
                let Some(cands2) = by_hash2.get(hash) else { continue };
                // Greedy assignment in id order; ties on line distance
                // resolved by smallest post-order index.
                let mut used2: HashSet<NodeId> = HashSet::new();
                for &t1 in cands1 {
                    let line1 = self.pre.line_span(t1).0 as i64;
                    let best = cands2
                        .iter()
                        .copied()
                        .filter(|t2| !used2.contains(t2))
                        .filter(|&t2| self.isomorphic(t1, t2))
                        .min_by_key(|&t2| {
                            (
                                (self.post.line_span(t2).0 as i64 - line1).abs(),
                                self.post_post_order[t2.index()],
                            )
                        });
                    if let Some(t2) = best {
                        used2.insert(t2);
                        matched1.insert(t1);
                        matched2.insert(t2);
                        self.add_subtree_pair(t1, t2);
                    }
                }
            }
            for n in level1 {
                if !matched1.contains(&n) {
                    open_children(&mut open1, self.pre, n);
                }
            }
            for n in level2 {
                if !matched2.contains(&n) {
                    open_children(&mut open2, self.post, n);
                }
            }
        }
    }

    fn bottom_up(&mut self) {
        // Visit pre nodes in post-order.
        let order: Vec<NodeId> = {
            let mut ids: Vec<NodeId> = self.pre.pre_order().collect();
            ids.sort_by_key(|n| self.pre_post_order[n.index()]);
            ids
        };
        for t1 in order {
            let is_root = t1 == self.pre.root();
            if self.pre_to_post.contains_key(&t1) || (self.pre.is_leaf(t1) && !is_root) {
                continue;
            }
            let candidates = self.container_candidates(t1);
            let line1 = self.pre.line_span(t1).0 as i64;
            let best = candidates
                .into_iter()
                .map(|t2| (t2, self.dice(t1, t2)))
                .filter(|&(_, d)| d >= self.params.sim_threshold)
                .max_by(|a, b| {
                    a.1.partial_cmp(&b.1)
                        .unwrap()
                        .then_with(|| {
                            let da = (self.post.line_span(a.0).0 as i64 - line1).abs();
                            let db = (self.post.line_span(b.0).0 as i64 - line1).abs();
                            db.cmp(&da)
                        })
                        .then_with(|| {
                            self.post_post_order[b.0.index()]
                                .cmp(&self.post_post_order[a.0.index()])
                        })
                });
            if let Some((t2, _)) = best {
                self.add_pair(t1, t2);
                self.recover_children(t1, t2);
            } else if is_root {
                let r2 = self.post.root();
                if !self.post_to_pre.contains_key(&r2) && self.pre.kind(t1) == self.post.kind(r2) {
                    self.add_pair(t1, r2);
                    self.recover_children(t1, r2);
                }
            }
        }
    }

    /// Unmatched post containers of the same kind that hold a node matched
    /// from within `t1`.
    fn container_candidates(&self, t1: NodeId) -> Vec<NodeId> {
        let kind = self.pre.kind(t1);
        let mut seen: HashSet<NodeId> = HashSet::new();
        let mut out: Vec<NodeId> = Vec::new();
        for d in self.pre.subtree(t1).skip(1) {
            let Some(&mapped) = self.pre_to_post.get(&d) else { continue };
            let mut cur = self.post.parent(mapped);
            while let Some(p) = cur {
                if !seen.insert(p) {
                    break;
                }
                if self.post.kind(p) == kind && !self.post_to_pre.contains_key(&p) {
                    out.push(p);
                }
                cur = self.post.parent(p);
            }
        }
        out.sort_by_key(|n| n.index());
        out.dedup();
        out
    }

    fn dice(&self, t1: NodeId, t2: NodeId) -> f64 {
        let d1 = self.pre.descendant_count(t1);
        let d2 = self.post.descendant_count(t2);
        if d1 + d2 == 0 {
            return 0.0;
        }
        let t2_start = t2.index();
        let t2_end = t2_start + d2 + 1;
        let common = self
            .pre
            .subtree(t1)
            .skip(1)
            .filter(|d| {
                self.pre_to_post
                    .get(d)
                    .map(|m| {
                        let i = m.index();
                        i > t2_start && i < t2_end
                    })
                    .unwrap_or(false)
            })
            .count();
        2.0 * common as f64 / (d1 + d2) as f64
    }

    /// Pair up the remaining children of a newly matched container by kind
    /// (longest common subsequence over kind sequences), recursing into
    /// pairs as they are created.
    fn recover_children(&mut self, t1: NodeId, t2: NodeId) {
        let c1: Vec<NodeId> = self.pre.children(t1).to_vec();
        let c2: Vec<NodeId> = self.post.children(t2).to_vec();
        let eq = |m: &Matcher, a: NodeId, b: NodeId| -> bool {
            match (m.pre_to_post.get(&a), m.post_to_pre.get(&b)) {
                (Some(&mb), _) => mb == b,
                (None, Some(_)) => false,
                (None, None) => m.pre.kind(a) == m.post.kind(b),
            }
        };
        // LCS table over the child sequences.
        let n = c1.len();
        let k = c2.len();
        let mut lcs = vec![vec![0usize; k + 1]; n + 1];
        for i in (0..n).rev() {
            for j in (0..k).rev() {
                lcs[i][j] = if eq(self, c1[i], c2[j]) {
                    lcs[i + 1][j + 1] + 1
                } else {
                    lcs[i + 1][j].max(lcs[i][j + 1])
                };
            }
        }
        let (mut i, mut j) = (0, 0);
        while i < n && j < k {
            if eq(self, c1[i], c2[j]) && lcs[i][j] == lcs[i + 1][j + 1] + 1 {
                if !self.pre_to_post.contains_key(&c1[i]) {
                    self.add_pair(c1[i], c2[j]);
                    self.recover_children(c1[i], c2[j]);
                }
                i += 1;
                j += 1;
            } else if lcs[i + 1][j] >= lcs[i][j + 1] {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    fn finish(self) -> EditMapping {
        let mut pairs: Vec<(NodeId, NodeId)> = self.pre_to_post.iter().map(|(&a, &b)| (a, b)).collect();
        pairs.sort_by_key(|&(a, _)| a);

        let mut actions = Vec::new();
        for a in self.pre.pre_order() {
            match self.pre_to_post.get(&a) {
                None => actions.push(EditAction::Delete(a)),
                Some(&b) => {
                    if self.pre.is_leaf(a)
                        && self.post.is_leaf(b)
                        && self.pre.text(a) != self.post.text(b)
                    {
                        actions.push(EditAction::Update(a, b));
                    }
                    let parents_correspond = match (self.pre.parent(a), self.post.parent(b)) {
                        (None, None) => true,
                        (Some(pa), Some(pb)) => {
                            self.pre_to_post.get(&pa).copied() == Some(pb)
                        }
                        _ => false,
                    };
                    if !parents_correspond {
                        actions.push(EditAction::Move(a, b));
                    }
                }
            }
        }
        for b in self.post.pre_order() {
            if !self.post_to_pre.contains_key(&b) {
                actions.push(EditAction::Insert(b));
            }
        }
        EditMapping { pairs, actions }
    }
}

fn push_open(open: &mut BTreeMap<usize, Vec<NodeId>>, tree: &SyntaxTree, node: NodeId) {
    open.entry(tree.height(node)).or_default().push(node);
}

fn open_children(open: &mut BTreeMap<usize, Vec<NodeId>>, tree: &SyntaxTree, node: NodeId) {
    for &c in tree.children(node) {
        push_open(open, tree, c);
    }
}

/// Isomorphism hash per node: kind, leaf label, and children hashes.
fn subtree_hashes(tree: &SyntaxTree) -> Vec<u64> {
    let mut hashes = vec![0u64; tree.len()];
    for id in tree.pre_order().collect::<Vec<_>>().into_iter().rev() {
        let mut h = fnv(0xcbf29ce484222325, tree.kind(id).as_bytes());
        if tree.is_leaf(id) {
            h = fnv(h, tree.text(id).as_bytes());
        } else {
            for &c in tree.children(id) {
                h = fnv_u64(h, hashes[c.index()]);
            }
        }
        hashes[id.index()] = h;
    }
    hashes
}

fn fnv(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn fnv_u64(h: u64, v: u64) -> u64 {
    fnv(h, &v.to_le_bytes())
}

fn post_order_index(tree: &SyntaxTree) -> Vec<usize> {
    let mut index = vec![0usize; tree.len()];
    let mut counter = 0usize;
    // Iterative post-order.
    let mut stack: Vec<(NodeId, bool)> = vec![(tree.root(), false)];
    while let Some((node, expanded)) = stack.pop() {
        if expanded {
            index[node.index()] = counter;
            counter += 1;
        } else {
            stack.push((node, true));
            for &c in tree.children(node).iter().rev() {
                stack.push((c, false));
            }
        }
    }
    index
}
