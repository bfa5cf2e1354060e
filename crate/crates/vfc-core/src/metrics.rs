//! Scoring of external classifier outputs: F1 at a threshold, threshold
//! sweeps, and the FPR-constrained detection score
//! `PD-S = FNR @ (FPR <= r)`.
//!
//! The classification convention is fixed globally: a prediction is
//! positive iff its score is greater than or equal to the threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

/// One scored prediction for a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPrediction {
    pub id: String,
    pub score: f64,
    pub label: Label,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no predictions")]
    Empty,
    #[error("score for {0:?} is not finite")]
    NonFiniteScore(String),
    #[error("duplicate prediction id {0:?}")]
    DuplicateId(String),
    #[error("need at least one positive and one negative label")]
    OneClassOnly,
    #[error("r must lie in [0, 1], got {0}")]
    InvalidR(f64),
    #[error(
        "scores are discrete class outputs (only 0 and 1); the false-positive \
         rate cannot be calibrated, so PD-S is undefined"
    )]
    DiscreteScores,
}

/// Counts and derived rates at one decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub fpr: f64,
    pub fnr: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl OperatingPoint {
    fn at(preds: &[ScoredPrediction], threshold: f64) -> OperatingPoint {
        let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
        for p in preds {
            let positive = p.score >= threshold;
            match (positive, p.label) {
                (true, Label::Vfc) => tp += 1,
                (true, Label::NonVfc) => fp += 1,
                (false, Label::NonVfc) => tn += 1,
                (false, Label::Vfc) => fn_ += 1,
            }
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        OperatingPoint {
            threshold,
            tp,
            fp,
            tn,
            fn_,
            fpr: ratio(fp, fp + tn),
            fnr: ratio(fn_, fn_ + tp),
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
        }
    }
}

fn check_finite(preds: &[ScoredPrediction]) -> Result<(), MetricsError> {
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    for p in preds {
        if !p.score.is_finite() {
            return Err(MetricsError::NonFiniteScore(p.id.clone()));
        }
    }
    Ok(())
}

/// Reject prediction sets with repeated record ids.
pub fn check_unique_ids(preds: &[ScoredPrediction]) -> Result<(), MetricsError> {
    let mut seen = std::collections::HashSet::new();
    for p in preds {
        if !seen.insert(p.id.as_str()) {
            return Err(MetricsError::DuplicateId(p.id.clone()));
        }
    }
    Ok(())
}

/// Confusion counts and rates at a fixed threshold (default 0.5).
pub fn f1_at(preds: &[ScoredPrediction], threshold: f64) -> Result<OperatingPoint, MetricsError> {
    check_finite(preds)?;
    Ok(OperatingPoint::at(preds, threshold))
}

/// One operating point per distinct score in descending order, preceded by
/// the all-negative point at +infinity. FPR is non-decreasing along the
/// sweep.
pub fn threshold_sweep(preds: &[ScoredPrediction]) -> Result<Vec<OperatingPoint>, MetricsError> {
    check_finite(preds)?;
    let mut scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
    scores.dedup();
    let mut out = Vec::with_capacity(scores.len() + 1);
    out.push(OperatingPoint::at(preds, f64::INFINITY));
    for t in scores {
        out.push(OperatingPoint::at(preds, t));
    }
    Ok(out)
}

/// The false-negative rate at the most permissive threshold whose
/// false-positive rate stays within `r`: over all candidate thresholds
/// (every distinct score plus +infinity), pick maximal TPR subject to
/// FPR <= r, breaking ties toward lower FPR, then the higher threshold.
/// Always defined: +infinity gives FPR 0, FNR 1.
///
/// Discrete class outputs (scores taking only the values 0 and 1) are
/// refused: they cannot be calibrated to a false-positive constraint.
pub fn pd_s(preds: &[ScoredPrediction], r: f64) -> Result<f64, MetricsError> {
    check_finite(preds)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(MetricsError::InvalidR(r));
    }
    let positives = preds.iter().filter(|p| p.label == Label::Vfc).count();
    if positives == 0 || positives == preds.len() {
        return Err(MetricsError::OneClassOnly);
    }
    if preds.iter().all(|p| p.score == 0.0 || p.score == 1.0) {
        return Err(MetricsError::DiscreteScores);
    }
    let sweep = threshold_sweep(preds)?;
    // The sweep runs from the highest threshold down, so keeping strict
    // improvements implements the higher-threshold tie rule.
    let mut best: Option<OperatingPoint> = None;
    for op in sweep {
        if op.fpr <= r {
            let better = match &best {
                None => true,
                Some(b) => {
                    op.recall > b.recall || (op.recall == b.recall && op.fpr < b.fpr)
                }
            };
            if better {
                best = Some(op);
            }
        }
    }
    Ok(best.expect("threshold +infinity always satisfies the constraint").fnr)
}
