//! Spell correction over patterns that may contain `*` placeholders.
//!
//! `*` is an ordinary symbol that never equals a letter, so resolving a star
//! costs one edit (substitute it or delete it). Candidate generation is
//! therefore plain Levenshtein search; [`SpellIndex`] answers it from a
//! deletion-neighbourhood index instead of scanning the word list.

mod distance;
mod index;

pub use distance::{bounded_edit_distance, edit_distance};
pub use index::SpellIndex;

use std::fmt;

use thiserror::Error;

/// The placeholder inserted by the receiver for each missing character.
pub const STAR: u8 = b'*';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern symbol {0:?} is neither a letter nor '*'")]
    BadSymbol(char),
}

/// A lowercase word in which some letters may be replaced by `*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    symbols: String,
    star_count: usize,
}

impl Pattern {
    pub fn new(s: &str) -> Result<Self, PatternError> {
        let mut symbols = String::with_capacity(s.len());
        let mut star_count = 0;
        for c in s.chars() {
            match c {
                '*' => {
                    star_count += 1;
                    symbols.push('*');
                }
                c if c.is_ascii_alphabetic() => symbols.push(c.to_ascii_lowercase()),
                c => return Err(PatternError::BadSymbol(c)),
            }
        }
        Ok(Self {
            symbols,
            star_count,
        })
    }

    /// `word` with the characters at `positions` replaced by `*`.
    pub fn masked(word: &str, positions: &[usize]) -> Result<Self, PatternError> {
        let mut bytes = word.as_bytes().to_vec();
        for &p in positions {
            bytes[p] = STAR;
        }
        Self::new(std::str::from_utf8(&bytes).expect("ascii"))
    }

    /// `word` followed by a single `*`.
    pub fn appended(word: &str) -> Result<Self, PatternError> {
        Self::new(&format!("{word}*"))
    }

    pub fn as_str(&self) -> &str {
        &self.symbols
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.symbols.as_bytes()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn star_count(&self) -> usize {
        self.star_count
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbols)
    }
}

/// Dictionary words within some edit distance of a pattern, ordered by
/// descending frequency and then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateSet {
    words: Vec<String>,
}

impl CandidateSet {
    pub(crate) fn from_sorted(words: Vec<String>) -> Self {
        Self { words }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// `K`, the number of candidates.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.iter().any(|w| w == word)
    }

    pub fn best(&self) -> Option<&str> {
        self.words.first().map(String::as_str)
    }
}

impl IntoIterator for CandidateSet {
    type Item = String;
    type IntoIter = std::vec::IntoIter<String>;

    fn into_iter(self) -> Self::IntoIter {
        self.words.into_iter()
    }
}
