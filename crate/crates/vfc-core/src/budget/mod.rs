//! Token accounting and change-preserving truncation.
//!
//! Documents (unified or enriched diffs) are flattened to line sequences
//! tagged with a [`LineClass`]. Token counts are always taken over the
//! line content, excluding the one-character diff marker, so the four
//! class counts partition the document total.

mod tokenizer;
mod truncate;

pub use tokenizer::{Tokenizer, TokenizerMode, VocabError};
pub use truncate::{truncate_context_aware, truncate_naive, TruncationError, TruncationReport};

use serde::{Deserialize, Serialize};

use crate::diff::DocumentLine;

/// Line taxonomy used for token accounting: changed code, file/hunk
/// headers, surrounding context, and commit message text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineClass {
    Change,
    Header,
    Context,
    Message,
}

/// Token counts per line class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenClassCounts {
    pub change: usize,
    pub header: usize,
    pub context: usize,
    pub message: usize,
}

impl TokenClassCounts {
    pub fn total(&self) -> usize {
        self.change + self.header + self.context + self.message
    }

    pub fn add(&mut self, class: LineClass, tokens: usize) {
        match class {
            LineClass::Change => self.change += tokens,
            LineClass::Header => self.header += tokens,
            LineClass::Context => self.context += tokens,
            LineClass::Message => self.message += tokens,
        }
    }

    pub fn get(&self, class: LineClass) -> usize {
        match class {
            LineClass::Change => self.change,
            LineClass::Header => self.header,
            LineClass::Context => self.context,
            LineClass::Message => self.message,
        }
    }
}

/// Count tokens per class over a document line sequence.
pub fn count_classes(lines: &[DocumentLine], tokenizer: &Tokenizer) -> TokenClassCounts {
    let mut counts = TokenClassCounts::default();
    for line in lines {
        counts.add(line.class, tokenizer.count(&line.text));
    }
    counts
}

/// Total token count of a document line sequence.
pub fn count_tokens(lines: &[DocumentLine], tokenizer: &Tokenizer) -> usize {
    count_classes(lines, tokenizer).total()
}
