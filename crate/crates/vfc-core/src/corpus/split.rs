//! Train/validation/test split strategies: random, temporal,
//! group-stratified (greedy + local search), and CVE-holdout.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::record::CommitRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Val,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Val, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Val => "val",
            SplitName::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitStrategy {
    Random,
    Temporal,
    Group,
    Cve,
}

/// Target split fractions; positive and summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for Fractions {
    fn default() -> Self {
        Fractions {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl Fractions {
    pub fn validate(&self) -> Result<(), SplitError> {
        let sum = self.train + self.val + self.test;
        if self.train <= 0.0 || self.val <= 0.0 || self.test <= 0.0 {
            return Err(SplitError::BadFractions(
                "fractions must be positive".to_string(),
            ));
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SplitError::BadFractions(format!(
                "fractions sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    fn get(&self, split: SplitName) -> f64 {
        match split {
            SplitName::Train => self.train,
            SplitName::Val => self.val,
            SplitName::Test => self.test,
        }
    }
}

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("need at least 3 records, got {0}")]
    TooFewRecords(usize),
    #[error("insufficient groups: need at least 3 distinct group ids, got {0}")]
    InsufficientGroups(usize),
    #[error("need at least 2 CVE-mapped VFC records, got {0}")]
    TooFewCveRecords(usize),
    #[error("invalid fractions: {0}")]
    BadFractions(String),
}

/// Per-split achieved statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub count: usize,
    pub fraction: f64,
    pub vuln_ratio: f64,
}

/// A total assignment of records to splits, with the configuration that
/// produced it and the achieved fractions and vulnerability ratios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub strategy: SplitStrategy,
    pub seed: u64,
    pub fractions: Fractions,
    /// record id -> split, totally covering the input.
    pub assignments: BTreeMap<String, SplitName>,
    pub achieved: BTreeMap<SplitName, SplitStats>,
    pub warnings: Vec<String>,
}

impl SplitAssignment {
    fn new(strategy: SplitStrategy, seed: u64, fractions: Fractions) -> Self {
        SplitAssignment {
            strategy,
            seed,
            fractions,
            assignments: BTreeMap::new(),
            achieved: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn finalize(&mut self, records: &[CommitRecord]) {
        let mut per: BTreeMap<SplitName, (usize, usize)> = BTreeMap::new();
        for record in records {
            if let Some(&split) = self.assignments.get(&record.record_id()) {
                let e = per.entry(split).or_default();
                e.0 += 1;
                if record.is_vfc() {
                    e.1 += 1;
                }
            }
        }
        let total: usize = per.values().map(|v| v.0).sum();
        for split in SplitName::ALL {
            let (count, vfc) = per.get(&split).copied().unwrap_or((0, 0));
            self.achieved.insert(
                split,
                SplitStats {
                    count,
                    fraction: if total == 0 { 0.0 } else { count as f64 / total as f64 },
                    vuln_ratio: if count == 0 { 0.0 } else { vfc as f64 / count as f64 },
                },
            );
        }
    }
}

/// Contiguous cut points over `n` records for the given fractions, using
/// nearest-integer rounding so exact fractions split exactly.
fn cut_points(n: usize, fractions: Fractions) -> (usize, usize) {
    let c1 = (n as f64 * fractions.train).round() as usize;
    let c2 = (n as f64 * (fractions.train + fractions.val)).round() as usize;
    (c1.min(n), c2.min(n))
}

/// Seeded shuffle followed by contiguous cuts.
pub fn split_random(
    records: &[CommitRecord],
    fractions: Fractions,
    seed: u64,
) -> Result<SplitAssignment, SplitError> {
    fractions.validate()?;
    if records.len() < 3 {
        return Err(SplitError::TooFewRecords(records.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut rng);
    let (c1, c2) = cut_points(records.len(), fractions);
    let mut out = SplitAssignment::new(SplitStrategy::Random, seed, fractions);
    for (pos, &i) in order.iter().enumerate() {
        let split = if pos < c1 {
            SplitName::Train
        } else if pos < c2 {
            SplitName::Val
        } else {
            SplitName::Test
        };
        out.assignments.insert(records[i].record_id(), split);
    }
    out.finalize(records);
    Ok(out)
}

/// Chronological cut: earliest fraction trains, then validation, then
/// test. Ties broken by sha, then repo.
pub fn split_temporal(
    records: &[CommitRecord],
    fractions: Fractions,
) -> Result<SplitAssignment, SplitError> {
    fractions.validate()?;
    if records.len() < 3 {
        return Err(SplitError::TooFewRecords(records.len()));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = &records[a];
        let rb = &records[b];
        ra.timestamp
            .cmp(&rb.timestamp)
            .then_with(|| ra.sha.cmp(&rb.sha))
            .then_with(|| ra.repo.cmp(&rb.repo))
    });
    let (c1, c2) = cut_points(records.len(), fractions);
    let mut out = SplitAssignment::new(SplitStrategy::Temporal, 0, fractions);
    for (pos, &i) in order.iter().enumerate() {
        let split = if pos < c1 {
            SplitName::Train
        } else if pos < c2 {
            SplitName::Val
        } else {
            SplitName::Test
        };
        out.assignments.insert(records[i].record_id(), split);
    }
    out.finalize(records);
    Ok(out)
}

#[derive(Debug, Clone)]
struct GroupInfo {
    key: String,
    indices: Vec<usize>,
    vfc: usize,
}

/// Greedy two-way partition of whole groups refined by local search
/// (single moves and pairwise swaps) on the objective
/// J = |size deviation| + |vulnerability-ratio deviation|, equal weights.
struct TwoWay<'a> {
    groups: &'a [GroupInfo],
    /// true = first side.
    membership: Vec<bool>,
    target_first: f64,
    total: usize,
    global_vfc: usize,
    first_size: usize,
    first_vfc: usize,
}

impl<'a> TwoWay<'a> {
    fn new(groups: &'a [GroupInfo], target_first: f64) -> Self {
        let total: usize = groups.iter().map(|g| g.indices.len()).sum();
        let global_vfc: usize = groups.iter().map(|g| g.vfc).sum();
        let mut tw = TwoWay {
            groups,
            membership: vec![false; groups.len()],
            target_first,
            total,
            global_vfc,
            first_size: 0,
            first_vfc: 0,
        };
        // Greedy: largest groups first, each to the side with the larger
        // remaining deficit.
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(groups[i].indices.len()));
        let mut second_size = 0usize;
        let first_target = target_first * total as f64;
        let second_target = (1.0 - target_first) * total as f64;
        for i in order {
            let deficit_first = first_target - tw.first_size as f64;
            let deficit_second = second_target - second_size as f64;
            if deficit_first > deficit_second {
                tw.set(i, true);
            } else {
                second_size += groups[i].indices.len();
            }
        }
        tw
    }

    fn set(&mut self, i: usize, first: bool) {
        if self.membership[i] == first {
            return;
        }
        let size = self.groups[i].indices.len();
        let vfc = self.groups[i].vfc;
        if first {
            self.first_size += size;
            self.first_vfc += vfc;
        } else {
            self.first_size -= size;
            self.first_vfc -= vfc;
        }
        self.membership[i] = first;
    }

    fn objective_with(&self, first_size: usize, first_vfc: usize) -> f64 {
        let total = self.total as f64;
        let global_ratio = if self.total == 0 {
            0.0
        } else {
            self.global_vfc as f64 / total
        };
        let second_size = self.total - first_size;
        let second_vfc = self.global_vfc - first_vfc;
        let frac_dev = (first_size as f64 / total - self.target_first).abs()
            + (second_size as f64 / total - (1.0 - self.target_first)).abs();
        let ratio = |size: usize, vfc: usize| {
            if size == 0 {
                global_ratio
            } else {
                vfc as f64 / size as f64
            }
        };
        let ratio_dev = (ratio(first_size, first_vfc) - global_ratio).abs()
            + (ratio(second_size, second_vfc) - global_ratio).abs();
        frac_dev + ratio_dev
    }

    fn objective(&self) -> f64 {
        self.objective_with(self.first_size, self.first_vfc)
    }

    /// Hypothetical objective after moving group `i` to the other side.
    fn objective_after_move(&self, i: usize) -> f64 {
        let size = self.groups[i].indices.len();
        let vfc = self.groups[i].vfc;
        let (s, v) = if self.membership[i] {
            (self.first_size - size, self.first_vfc - vfc)
        } else {
            (self.first_size + size, self.first_vfc + vfc)
        };
        self.objective_with(s, v)
    }

    fn objective_after_swap(&self, a: usize, b: usize) -> f64 {
        // `a` on the first side, `b` on the second.
        let s = self.first_size - self.groups[a].indices.len() + self.groups[b].indices.len();
        let v = self.first_vfc - self.groups[a].vfc + self.groups[b].vfc;
        self.objective_with(s, v)
    }

    fn local_search(&mut self, max_rounds: usize) {
        for _ in 0..max_rounds {
            let current = self.objective();
            let mut best: Option<(f64, usize, Option<usize>)> = None;
            for i in 0..self.groups.len() {
                let j = self.objective_after_move(i);
                if j + 1e-12 < current && best.map(|(bj, _, _)| j < bj).unwrap_or(true) {
                    best = Some((j, i, None));
                }
            }
            let firsts: Vec<usize> =
                (0..self.groups.len()).filter(|&i| self.membership[i]).collect();
            let seconds: Vec<usize> =
                (0..self.groups.len()).filter(|&i| !self.membership[i]).collect();
            for &a in &firsts {
                for &b in &seconds {
                    let j = self.objective_after_swap(a, b);
                    if j + 1e-12 < current && best.map(|(bj, _, _)| j < bj).unwrap_or(true) {
                        best = Some((j, a, Some(b)));
                    }
                }
            }
            match best {
                None => break,
                Some((_, a, None)) => {
                    let to_first = !self.membership[a];
                    self.set(a, to_first);
                }
                Some((_, a, Some(b))) => {
                    self.set(a, false);
                    self.set(b, true);
                }
            }
        }
    }
}

/// Hierarchical group-stratified split: whole groups are assigned to
/// test vs rest first, then the rest is split into train vs validation,
/// each stage via greedy assignment refined by local search. No group ever
/// spans two splits.
pub fn split_group_stratified(
    records: &[CommitRecord],
    fractions: Fractions,
    seed: u64,
) -> Result<SplitAssignment, SplitError> {
    fractions.validate()?;
    let mut by_group: BTreeMap<&str, GroupInfo> = BTreeMap::new();
    for (i, record) in records.iter().enumerate() {
        let entry = by_group.entry(record.group_key()).or_insert_with(|| GroupInfo {
            key: record.group_key().to_string(),
            indices: Vec::new(),
            vfc: 0,
        });
        entry.indices.push(i);
        if record.is_vfc() {
            entry.vfc += 1;
        }
    }
    if by_group.len() < 3 {
        return Err(SplitError::InsufficientGroups(by_group.len()));
    }
    let mut groups: Vec<GroupInfo> = by_group.into_values().collect();
    // The seed settles ordering among equal-size groups: shuffle, then
    // stable-sort by size inside the greedy stage.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    groups.shuffle(&mut rng);

    // Stage 1: test vs rest.
    let mut stage1 = TwoWay::new(&groups, fractions.test);
    stage1.local_search(512);
    let test_groups: Vec<usize> =
        (0..groups.len()).filter(|&i| stage1.membership[i]).collect();
    let rest_groups: Vec<GroupInfo> = (0..groups.len())
        .filter(|&i| !stage1.membership[i])
        .map(|i| groups[i].clone())
        .collect();

    // Stage 2: split the rest into train vs val at the renormalized target.
    let val_share = fractions.val / (fractions.train + fractions.val);
    let mut stage2 = TwoWay::new(&rest_groups, val_share);
    stage2.local_search(512);

    let mut out = SplitAssignment::new(SplitStrategy::Group, seed, fractions);
    for &gi in &test_groups {
        for &ri in &groups[gi].indices {
            out.assignments
                .insert(records[ri].record_id(), SplitName::Test);
        }
    }
    for (gi, group) in rest_groups.iter().enumerate() {
        let split = if stage2.membership[gi] {
            SplitName::Val
        } else {
            SplitName::Train
        };
        for &ri in &group.indices {
            out.assignments.insert(records[ri].record_id(), split);
        }
    }
    out.finalize(records);

    let n = records.len();
    for group in &groups {
        let share = group.indices.len() as f64 / n as f64;
        if share > 0.5 {
            out.warnings.push(format!(
                "group {:?} holds {:.0}% of all records; split targets are best-effort",
                group.key,
                share * 100.0
            ));
        }
    }
    for split in SplitName::ALL {
        let achieved = out.achieved[&split];
        let target = fractions.get(split);
        if (achieved.fraction - target).abs() > 0.02 {
            out.warnings.push(format!(
                "{} fraction {:.3} deviates from target {:.3} by more than 2 points",
                split.as_str(),
                achieved.fraction,
                target
            ));
        }
    }
    Ok(out)
}

/// CVE holdout: every CVE-mapped VFC goes alternately (sha-sorted) to
/// validation or test; none trains. Benign records are drawn in to match
/// the target vulnerability ratio (the corpus ratio when unset); all
/// remaining records train. `fractions` only documents the configured
/// targets; the CVE count and ratio determine the actual sizes.
pub fn split_cve(
    records: &[CommitRecord],
    fractions: Fractions,
    seed: u64,
    target_ratio: Option<f64>,
) -> Result<SplitAssignment, SplitError> {
    fractions.validate()?;
    let mut cve_vfc: Vec<usize> = (0..records.len())
        .filter(|&i| records[i].is_vfc() && !records[i].cve_ids.is_empty())
        .collect();
    if cve_vfc.len() < 2 {
        return Err(SplitError::TooFewCveRecords(cve_vfc.len()));
    }
    cve_vfc.sort_by(|&a, &b| {
        records[a]
            .sha
            .cmp(&records[b].sha)
            .then_with(|| records[a].repo.cmp(&records[b].repo))
    });

    let global_vfc = records.iter().filter(|r| r.is_vfc()).count();
    let ratio = target_ratio
        .unwrap_or(global_vfc as f64 / records.len() as f64)
        .clamp(1e-6, 1.0);

    let mut out = SplitAssignment::new(SplitStrategy::Cve, seed, fractions);
    let mut val_vfc = 0usize;
    let mut test_vfc = 0usize;
    for (pos, &i) in cve_vfc.iter().enumerate() {
        let split = if pos % 2 == 0 {
            val_vfc += 1;
            SplitName::Val
        } else {
            test_vfc += 1;
            SplitName::Test
        };
        out.assignments.insert(records[i].record_id(), split);
    }

    // Benign records matching the ratio: v VFCs need v*(1-r)/r benign.
    let benign_needed = |v: usize| ((v as f64) * (1.0 - ratio) / ratio).round() as usize;
    let mut benign: Vec<usize> = (0..records.len())
        .filter(|&i| !records[i].is_vfc())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    benign.shuffle(&mut rng);
    let need_val = benign_needed(val_vfc);
    let need_test = benign_needed(test_vfc);
    if benign.len() < need_val + need_test {
        out.warnings.push(format!(
            "only {} benign records available for a target of {}",
            benign.len(),
            need_val + need_test
        ));
    }
    for (pos, &i) in benign.iter().enumerate() {
        let split = if pos < need_val.min(benign.len()) {
            SplitName::Val
        } else if pos < (need_val + need_test).min(benign.len()) {
            SplitName::Test
        } else {
            SplitName::Train
        };
        out.assignments.insert(records[i].record_id(), split);
    }
    // Everything unassigned (non-CVE VFCs) trains.
    for record in records {
        out.assignments
            .entry(record.record_id())
            .or_insert(SplitName::Train);
    }
    out.finalize(records);
    Ok(out)
}

/// Leakage check helper: group key -> set of splits its members landed in.
pub fn group_leakage(
    records: &[CommitRecord],
    assignment: &SplitAssignment,
) -> HashMap<String, Vec<SplitName>> {
    let mut map: HashMap<String, Vec<SplitName>> = HashMap::new();
    for record in records {
        if let Some(&split) = assignment.assignments.get(&record.record_id()) {
            let splits = map.entry(record.group_key().to_string()).or_default();
            if !splits.contains(&split) {
                splits.push(split);
            }
        }
    }
    map
}
