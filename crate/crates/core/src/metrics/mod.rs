//! Evaluation metrics: sentence BLEU, embedding similarity and
//! character/word accuracy.

mod embed;

pub use embed::{
    cosine, sentence_similarity, CheckedProvider, EmbeddingProvider, Embeddings, HttpEmbeddingProvider,
    MockEmbeddingProvider,
};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spellkit::edit_distance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("BLEU needs at least one word on each side")]
    EmptyInput,
    #[error("max_n must be at least 1")]
    MaxN,
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("embedding provider returned {0}")]
    BadEmbeddings(String),
}

/// Sentence BLEU over whitespace tokens with uniform weights `1/max_n`,
/// clipped n-gram precision, no smoothing, and brevity penalty
/// `1` if `c > r` else `exp(1 - r/c)`.
pub fn bleu(reference: &str, candidate: &str, max_n: usize) -> Result<f64, MetricsError> {
    if max_n == 0 {
        return Err(MetricsError::MaxN);
    }
    let r: Vec<&str> = reference.split_whitespace().collect();
    let c: Vec<&str> = candidate.split_whitespace().collect();
    if r.is_empty() || c.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        if c.len() < n {
            return Ok(0.0);
        }
        let ref_counts = ngram_counts(&r, n);
        let mut clipped = 0usize;
        for (g, count) in ngram_counts(&c, n) {
            clipped += count.min(ref_counts.get(&g).copied().unwrap_or(0));
        }
        if clipped == 0 {
            return Ok(0.0);
        }
        let p = clipped as f64 / (c.len() + 1 - n) as f64;
        log_sum += p.ln() / max_n as f64;
    }
    let bp = if c.len() > r.len() {
        1.0
    } else {
        (1.0 - r.len() as f64 / c.len() as f64).exp()
    };
    Ok(bp * log_sum.exp())
}

fn ngram_counts<'a, 'b>(words: &'b [&'a str], n: usize) -> HashMap<&'b [&'a str], usize> {
    let mut m = HashMap::new();
    for g in words.windows(n) {
        *m.entry(g).or_insert(0) += 1;
    }
    m
}

/// `1 - ed(reference, candidate) / max(len)`; 1 when both are empty.
pub fn char_accuracy(reference: &str, candidate: &str) -> f64 {
    let longest = reference.len().max(candidate.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance(reference, candidate) as f64 / longest as f64
}

/// Longest common subsequence of the word sequences over the longer word
/// count; 1 when both are empty.
pub fn word_accuracy(reference: &str, candidate: &str) -> f64 {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let c: Vec<&str> = candidate.split_whitespace().collect();
    let longest = r.len().max(c.len());
    if longest == 0 {
        return 1.0;
    }
    let mut prev = vec![0usize; c.len() + 1];
    let mut cur = vec![0usize; c.len() + 1];
    for rw in &r {
        for (j, cw) in c.iter().enumerate() {
            cur[j + 1] = if rw == cw {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[c.len()] as f64 / longest as f64
}

pub fn char_word_accuracy(reference: &str, candidate: &str) -> (f64, f64) {
    (char_accuracy(reference, candidate), word_accuracy(reference, candidate))
}

/// Scores of one recovered text against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub bleu: f64,
    /// Absent when no embedding provider is configured or it failed.
    pub similarity: Option<f64>,
    pub char_accuracy: f64,
    pub word_accuracy: f64,
}

impl EvalRecord {
    /// All-zero scores, used when a frame could not be interpreted.
    pub fn lost() -> Self {
        Self {
            bleu: 0.0,
            similarity: None,
            char_accuracy: 0.0,
            word_accuracy: 0.0,
        }
    }

    /// BLEU is taken as 0 when the candidate is empty.
    pub fn score(
        reference: &str,
        candidate: &str,
        max_n: usize,
        provider: Option<&dyn EmbeddingProvider>,
    ) -> Result<Self, MetricsError> {
        let bleu = match bleu(reference, candidate, max_n) {
            Err(MetricsError::EmptyInput) if !reference.trim().is_empty() => 0.0,
            other => other?,
        };
        let similarity = provider.and_then(|p| match sentence_similarity(reference, candidate, p) {
            Ok(s) => Some(s),
            Err(e) => {
                log::warn!("similarity unavailable: {e}");
                None
            }
        });
        let (char_accuracy, word_accuracy) = char_word_accuracy(reference, candidate);
        Ok(Self {
            bleu,
            similarity,
            char_accuracy,
            word_accuracy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bleu_hand_case() {
        let b = bleu("the cat sat", "the cat", 2).unwrap();
        assert!((b - (-0.5f64).exp()).abs() < 1e-12);
        assert!((b - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn bleu_edge_cases() {
        assert_eq!(bleu("a b c d", "a b c d", 4).unwrap(), 1.0);
        assert_eq!(bleu("a b c", "x y z", 4).unwrap(), 0.0);
        assert_eq!(bleu("a b c d e", "a b c", 4).unwrap(), 0.0);
        assert_eq!(bleu("", "a", 4), Err(MetricsError::EmptyInput));
        assert_eq!(bleu("a", "  ", 4), Err(MetricsError::EmptyInput));
        assert_eq!(bleu("a", "a", 0), Err(MetricsError::MaxN));
    }

    #[test]
    fn bleu_clips_repeats_and_is_asymmetric() {
        // candidate "the the the" against "the cat": p1 = 1/3 after clipping
        let b = bleu("the cat", "the the the", 1).unwrap();
        assert!((b - 1.0 / 3.0).abs() < 1e-12);
        let ab = bleu("the cat sat on the mat", "the cat sat", 2).unwrap();
        let ba = bleu("the cat sat", "the cat sat on the mat", 2).unwrap();
        assert_ne!(ab, ba);
    }

    #[test]
    fn accuracies() {
        assert_eq!(char_word_accuracy("same text", "same text"), (1.0, 1.0));
        assert!((char_accuracy("caramel", "cramel") - 6.0 / 7.0).abs() < 1e-12);
        assert_eq!(char_accuracy("", ""), 1.0);
        assert_eq!(word_accuracy("a b c d", "a c d"), 0.75);
        assert_eq!(word_accuracy("a b", "b a"), 0.5);
        assert_eq!(word_accuracy("", "x"), 0.0);
    }

    #[test]
    fn record_without_provider_has_no_similarity() {
        let r = EvalRecord::score("the cat sat down", "the cat sat down", 4, None).unwrap();
        assert_eq!(r.similarity, None);
        assert_eq!(r.bleu, 1.0);
        let r = EvalRecord::score("the cat sat", "", 4, None).unwrap();
        assert_eq!(r.bleu, 0.0);
    }

    proptest! {
        #[test]
        fn identical_sentences_score_one(words in proptest::collection::vec("[a-z]{1,6}", 4..30)) {
            let s = words.join(" ");
            prop_assert_eq!(bleu(&s, &s, 4).unwrap(), 1.0);
            prop_assert_eq!(char_word_accuracy(&s, &s), (1.0, 1.0));
        }

        #[test]
        fn scores_in_range(a in "[ab ]{0,30}", b in "[ab ]{0,30}") {
            if let Ok(v) = bleu(&a, &b, 4) {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let (c, w) = char_word_accuracy(&a, &b);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!((0.0..=1.0).contains(&w));
        }
    }
}
