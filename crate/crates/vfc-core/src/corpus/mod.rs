//! Normalized commit records and everything that shapes a corpus out of
//! them: ingestion, deduplication, filtering, split strategies, snapshot
//! access, and the sliding-window temporal scan.

mod dedup;
mod filter;
mod record;
mod snapshot;
mod split;
mod window;

pub use dedup::{dedup_exact, dedup_semantic, semantic_fingerprint};
pub use filter::{filter, FilterCriteria};
pub use record::{
    ingest, ingest_str, CommitRecord, IngestError, IngestReport, Label, LabelSource,
    LineViolation, RepoId,
};
pub use snapshot::{CommitContents, SnapshotError, SnapshotStore};
pub use split::{
    group_leakage, split_cve, split_group_stratified, split_random, split_temporal, Fractions,
    SplitAssignment, SplitError, SplitName, SplitStats, SplitStrategy,
};
pub use window::{
    align_distributions, js_divergence, sliding_window_scan, WindowDiagnostics, WindowError,
};
