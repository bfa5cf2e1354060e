//! Tooling for building analysis-ready vulnerability-fixing-commit (VFC)
//! corpora from raw commit data.
//!
//! The crate is organized around a pipeline:
//!
//! * [`diff`] — parse, regenerate, and render unified diffs; the shared
//!   data model for everything downstream.
//! * [`syntax`] — concrete syntax trees, comment stripping, and the
//!   statement-level IR with read/write variable sets.
//! * [`structdiff`] — structural tree matching between pre/post versions
//!   and changed-statement extraction.
//! * [`enrich`] — def-use slicing, control-flow enclosures, and emission
//!   of semantically enriched diffs at levels `cf`, `df1`, `df2`.
//! * [`budget`] — tokenizers, per-line-type token accounting, and
//!   change-preserving truncation.
//! * [`corpus`] — normalized commit records, ingestion, deduplication,
//!   filtering, split strategies, and sliding-window temporal scans.
//! * [`metrics`] — F1 and the FPR-constrained detection score over
//!   externally supplied classifier outputs.

pub mod budget;
pub mod corpus;
pub mod diff;
pub mod enrich;
pub mod metrics;
pub mod structdiff;
pub mod syntax;
