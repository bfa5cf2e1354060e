//! Conjunctive record filtering.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::record::{CommitRecord, LabelSource};

/// Filter criteria; every populated field must hold for a record to pass.
/// Set-valued criteria match on non-empty intersection.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FilterCriteria {
    pub languages: Option<BTreeSet<String>>,
    pub label_sources: Option<BTreeSet<LabelSource>>,
    pub sources: Option<BTreeSet<String>>,
    /// Inclusive start, exclusive end, seconds since epoch.
    pub time_range: Option<(i64, i64)>,
    pub has_cve: Option<bool>,
}

impl FilterCriteria {
    pub fn matches(&self, record: &CommitRecord) -> bool {
        if let Some(langs) = &self.languages {
            if record.languages.intersection(langs).next().is_none() {
                return false;
            }
        }
        if let Some(sources) = &self.label_sources {
            if record.label_source.intersection(sources).next().is_none() {
                return false;
            }
        }
        if let Some(sources) = &self.sources {
            if record.sources.intersection(sources).next().is_none() {
                return false;
            }
        }
        if let Some((start, end)) = self.time_range {
            if record.timestamp < start || record.timestamp >= end {
                return false;
            }
        }
        if let Some(has_cve) = self.has_cve {
            if record.cve_ids.is_empty() == has_cve {
                return false;
            }
        }
        true
    }
}

/// Keep records matching all criteria, preserving input order.
pub fn filter(records: Vec<CommitRecord>, criteria: &FilterCriteria) -> Vec<CommitRecord> {
    records.into_iter().filter(|r| criteria.matches(r)).collect()
}
