//! Sliding-window temporal diagnostics: project-distribution divergence,
//! unseen-project fraction, and vulnerability rate per window placement.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::record::CommitRecord;

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("window fractions must be positive and sum to at most 1 (got {0})")]
    BadWindow(f64),
    #[error("stride must be positive")]
    BadStride,
    #[error("invalid distribution: {0}")]
    BadDistribution(String),
}

/// Diagnostics for one placement of the train/val/test window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    /// Fraction of the chronologically ordered corpus skipped before the
    /// window starts.
    pub offset: f64,
    pub train_range: Range<usize>,
    pub val_range: Range<usize>,
    pub test_range: Range<usize>,
    /// Jensen-Shannon divergence between train and test project
    /// distributions, base-2 logs, in [0, 1].
    pub jsd: f64,
    /// Fraction of test records whose project never appears in train.
    pub unseen_project_fraction: f64,
    pub test_vuln_rate: f64,
    /// Slot for an externally supplied score (the scan itself trains
    /// nothing).
    pub test_f1: Option<f64>,
}

/// Slide a fixed (train, val, test) window across the chronologically
/// ordered corpus in `stride` increments and report diagnostics for each
/// placement.
pub fn sliding_window_scan(
    records: &[CommitRecord],
    window_fracs: (f64, f64, f64),
    stride: f64,
) -> Result<Vec<WindowDiagnostics>, WindowError> {
    if records.is_empty() {
        return Err(WindowError::EmptyCorpus);
    }
    let (ft, fv, fs) = window_fracs;
    let total = ft + fv + fs;
    if ft <= 0.0 || fv <= 0.0 || fs <= 0.0 || total > 1.0 + 1e-9 {
        return Err(WindowError::BadWindow(total));
    }
    if stride <= 0.0 {
        return Err(WindowError::BadStride);
    }

    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        records[a]
            .timestamp
            .cmp(&records[b].timestamp)
            .then_with(|| records[a].sha.cmp(&records[b].sha))
    });
    let n = records.len();
    let at = |frac: f64| -> usize { ((n as f64) * frac).round() as usize };

    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let offset = k as f64 * stride;
        if offset + total > 1.0 + 1e-9 {
            break;
        }
        let train_range = at(offset)..at(offset + ft);
        let val_range = at(offset + ft)..at(offset + ft + fv);
        let test_range = at(offset + ft + fv)..at(offset + total);

        let train_ids: Vec<usize> = order[train_range.clone()].to_vec();
        let test_ids: Vec<usize> = order[test_range.clone()].to_vec();

        let train_projects = project_counts(records, &train_ids);
        let test_projects = project_counts(records, &test_ids);
        let (p, q) = align_distributions(&train_projects, &test_projects);
        let jsd = js_divergence(&p, &q)?;

        let train_set: BTreeSet<&str> = train_projects.keys().map(|s| s.as_str()).collect();
        let unseen = test_ids
            .iter()
            .filter(|&&i| !train_set.contains(records[i].group_key()))
            .count();
        let vfc = test_ids.iter().filter(|&&i| records[i].is_vfc()).count();

        out.push(WindowDiagnostics {
            offset,
            train_range,
            val_range,
            test_range,
            jsd,
            unseen_project_fraction: if test_ids.is_empty() {
                0.0
            } else {
                unseen as f64 / test_ids.len() as f64
            },
            test_vuln_rate: if test_ids.is_empty() {
                0.0
            } else {
                vfc as f64 / test_ids.len() as f64
            },
            test_f1: None,
        });
        k += 1;
    }
    Ok(out)
}

fn project_counts(records: &[CommitRecord], ids: &[usize]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for &i in ids {
        *counts.entry(records[i].group_key().to_string()).or_insert(0) += 1;
    }
    counts
}

/// Normalize two count maps over their shared support, in key order.
pub fn align_distributions(
    a: &BTreeMap<String, usize>,
    b: &BTreeMap<String, usize>,
) -> (Vec<f64>, Vec<f64>) {
    let support: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    let ta: usize = a.values().sum();
    let tb: usize = b.values().sum();
    let mut p = Vec::with_capacity(support.len());
    let mut q = Vec::with_capacity(support.len());
    for key in support {
        p.push(if ta == 0 {
            0.0
        } else {
            *a.get(key).unwrap_or(&0) as f64 / ta as f64
        });
        q.push(if tb == 0 {
            0.0
        } else {
            *b.get(key).unwrap_or(&0) as f64 / tb as f64
        });
    }
    (p, q)
}

/// Jensen-Shannon divergence with base-2 logarithms:
/// `JSD = KL(p || m)/2 + KL(q || m)/2` with `m = (p + q)/2`.
/// Zero-probability terms contribute nothing; the result lies in [0, 1].
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64, WindowError> {
    if p.len() != q.len() {
        return Err(WindowError::BadDistribution(format!(
            "support sizes differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    for (name, dist) in [("p", p), ("q", q)] {
        if dist.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(WindowError::BadDistribution(format!(
                "{name} has negative or non-finite entries"
            )));
        }
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(WindowError::BadDistribution(format!(
                "{name} sums to {sum}, expected 1"
            )));
        }
    }
    let mut kl_p = 0.0;
    let mut kl_q = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let m = 0.5 * (pi + qi);
        if pi > 0.0 {
            kl_p += pi * (pi / m).log2();
        }
        if qi > 0.0 {
            kl_q += qi * (qi / m).log2();
        }
    }
    Ok((0.5 * kl_p + 0.5 * kl_q).clamp(0.0, 1.0))
}
