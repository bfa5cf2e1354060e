//! Tokenizer abstraction: a deterministic builtin approximation and an
//! external-vocabulary mode.

use std::collections::HashSet;
use std::path::Path;

use thiserror::Error;

/// Failure to load an external vocabulary file.
#[derive(Debug, Error)]
pub enum VocabError {
    #[error("cannot read vocabulary file {path:?}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("vocabulary file {path:?} is empty")]
    Empty { path: String },
}

/// How text is split into tokens.
#[derive(Debug, Clone)]
pub enum TokenizerMode {
    /// Split on whitespace, then split punctuation/operator characters into
    /// single-character tokens. Model-agnostic by design.
    BuiltinApprox,
    /// Greedy longest-prefix matching against a supplied subword
    /// vocabulary; unmatched characters count as one token each.
    ExternalVocab { vocab: HashSet<String>, max_len: usize },
}

/// A named tokenizer. `count` is deterministic and `count("") == 0`.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    pub name: String,
    pub mode: TokenizerMode,
}

impl Tokenizer {
    pub fn builtin() -> Self {
        Tokenizer {
            name: "builtin-approx".to_string(),
            mode: TokenizerMode::BuiltinApprox,
        }
    }

    /// Load an external vocabulary: one token per line, UTF-8.
    pub fn from_vocab_file(path: &Path) -> Result<Self, VocabError> {
        let text = std::fs::read_to_string(path).map_err(|source| VocabError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let vocab: HashSet<String> = text
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.to_string())
            .collect();
        if vocab.is_empty() {
            return Err(VocabError::Empty {
                path: path.display().to_string(),
            });
        }
        let max_len = vocab.iter().map(|t| t.len()).max().unwrap_or(1);
        Ok(Tokenizer {
            name: format!("vocab:{}", path.display()),
            mode: TokenizerMode::ExternalVocab { vocab, max_len },
        })
    }

    pub fn count(&self, text: &str) -> usize {
        match &self.mode {
            TokenizerMode::BuiltinApprox => count_builtin(text),
            TokenizerMode::ExternalVocab { vocab, max_len } => {
                text.split_whitespace()
                    .map(|w| count_greedy(w, vocab, *max_len))
                    .sum()
            }
        }
    }

    /// Byte spans of each token in `text`, in order. `count(text)` equals
    /// `token_spans(text).len()`.
    pub fn token_spans(&self, text: &str) -> Vec<(usize, usize)> {
        match &self.mode {
            TokenizerMode::BuiltinApprox => spans_builtin(text),
            TokenizerMode::ExternalVocab { vocab, max_len } => {
                let mut spans = Vec::new();
                let mut offset = 0;
                for chunk in text.split_inclusive(char::is_whitespace) {
                    let word = chunk.trim_end_matches(char::is_whitespace);
                    if !word.is_empty() {
                        spans_greedy(word, offset, vocab, *max_len, &mut spans);
                    }
                    offset += chunk.len();
                }
                spans
            }
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn count_builtin(text: &str) -> usize {
    let mut count = 0;
    let mut in_word = false;
    for c in text.chars() {
        if c.is_whitespace() {
            in_word = false;
        } else if is_word_char(c) {
            if !in_word {
                count += 1;
                in_word = true;
            }
        } else {
            // Punctuation and operators are single-character tokens.
            count += 1;
            in_word = false;
        }
    }
    count
}

fn spans_builtin(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut word_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = word_start.take() {
                spans.push((s, i));
            }
        } else if is_word_char(c) {
            word_start.get_or_insert(i);
        } else {
            if let Some(s) = word_start.take() {
                spans.push((s, i));
            }
            spans.push((i, i + c.len_utf8()));
        }
    }
    if let Some(s) = word_start {
        spans.push((s, text.len()));
    }
    spans
}

fn count_greedy(word: &str, vocab: &HashSet<String>, max_len: usize) -> usize {
    let mut count = 0;
    let mut rest = word;
    while !rest.is_empty() {
        let matched = greedy_match_len(rest, vocab, max_len);
        count += 1;
        rest = &rest[matched..];
    }
    count
}

fn spans_greedy(
    word: &str,
    offset: usize,
    vocab: &HashSet<String>,
    max_len: usize,
    spans: &mut Vec<(usize, usize)>,
) {
    let mut pos = 0;
    while pos < word.len() {
        let matched = greedy_match_len(&word[pos..], vocab, max_len);
        spans.push((offset + pos, offset + pos + matched));
        pos += matched;
    }
}

fn greedy_match_len(rest: &str, vocab: &HashSet<String>, max_len: usize) -> usize {
    let upper = rest.len().min(max_len);
    for end in (1..=upper).rev() {
        if rest.is_char_boundary(end) && vocab.contains(&rest[..end]) {
            return end;
        }
    }
    // Unknown character: consume one char as one token.
    rest.chars().next().map(|c| c.len_utf8()).unwrap_or(1)
}
