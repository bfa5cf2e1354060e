//! Concrete syntax trees, comment stripping, and the statement-level IR.
//!
//! Parsing is grammar-driven: C and C++ are registered; records in other
//! languages pass through the pipeline unenriched rather than failing it.

mod comments;
mod functions;
mod ir;
mod tree;

pub use comments::strip_comments;
pub use functions::{
    changed_functions, ChangedFunctions, FileContents, FileFallback, FunctionPair,
    FunctionVersion, MemoryContents, ResidualHunk,
};
pub use ir::{build_statement_ir, StatementEntry, StatementIR};
pub use tree::{NodeId, SyntaxTree};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Languages with a registered grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    C,
    Cpp,
}

impl Language {
    /// Look up a registered language by file path extension.
    pub fn from_path(path: &str) -> Option<Language> {
        let ext = path.rsplit('.').next()?;
        match ext {
            "c" | "h" => Some(Language::C),
            "cc" | "cpp" | "cxx" | "c++" | "hpp" | "hh" | "hxx" | "C" => Some(Language::Cpp),
            _ => None,
        }
    }

    /// Look up a registered language by its lowercase tag.
    pub fn from_tag(tag: &str) -> Option<Language> {
        match tag.to_ascii_lowercase().as_str() {
            "c" => Some(Language::C),
            "cpp" | "c++" | "cxx" => Some(Language::Cpp),
            _ => None,
        }
    }

    pub(crate) fn grammar(self) -> tree_sitter::Language {
        match self {
            Language::C => tree_sitter_c::LANGUAGE.into(),
            Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::Cpp => "cpp",
        }
    }
}

#[derive(Debug, Error)]
pub enum SyntaxError {
    /// No grammar registered for the requested language; callers fall back
    /// to the raw diff.
    #[error("no grammar registered for language {0:?}")]
    UnsupportedLanguage(String),
    #[error("tree-sitter failed to produce a tree")]
    ParserFailure,
}

/// Parse source text into a concrete syntax tree covering the full input.
/// Parsing is error-tolerant: syntactically broken input yields a tree with
/// error nodes flagged rather than a failure.
pub fn parse_source(text: &str, language: Language) -> Result<SyntaxTree, SyntaxError> {
    tree::parse(text, language)
}
