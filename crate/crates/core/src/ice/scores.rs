use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, RwLock};

use crate::corpus::{Token, TokenizedText};
use crate::spellkit::{Pattern, SpellIndex};

use super::IceError;

/// Words longer than this are treated as out of vocabulary.
pub const MAX_SCORED_WORD: usize = 24;

/// Weights of the importance score. `alpha` marks a character whose removal
/// leaves a unique candidate, `beta` and `gamma` scale the reciprocal
/// candidate counts of the first-pass and remaining characters, `delta`
/// scales non-word characters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self {
            alpha: 3.0,
            beta: 2.0,
            gamma: 1.0,
            delta: 2.0,
        }
    }
}

impl ScoreParams {
    pub fn validate(&self) -> Result<(), IceError> {
        let ok = self.alpha > self.beta
            && self.beta > self.gamma
            && self.gamma > 0.0
            && self.delta > 0.0;
        if ok {
            Ok(())
        } else {
            Err(IceError::ScoreParams)
        }
    }

    fn pick(&self, count: usize) -> f64 {
        match count {
            0 => 0.0,
            1 => -self.alpha,
            c => -self.beta / c as f64,
        }
    }
}

/// Importance scores of one window, all `<= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub params: ScoreParams,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Intermediate values of the word score, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WordScoreTrace {
    pub word: String,
    /// Candidate counts with one character starred (`0` when the word itself
    /// is not among the candidates).
    pub first_counts: Vec<usize>,
    pub first: Option<usize>,
    /// Counts with `first` and one more character starred; `None` at `first`.
    pub second_counts: Vec<Option<usize>>,
    pub second: Option<usize>,
    pub scores: Vec<f64>,
}

/// Computes and memoizes character scores against one dictionary.
#[derive(Debug)]
pub struct Scorer {
    index: Arc<SpellIndex>,
    params: ScoreParams,
    words: RwLock<HashMap<String, Arc<[f64]>>>,
    appended: RwLock<HashMap<String, f64>>,
}

impl Scorer {
    pub fn new(index: Arc<SpellIndex>, params: ScoreParams) -> Self {
        Self {
            index,
            params,
            words: RwLock::default(),
            appended: RwLock::default(),
        }
    }

    pub fn index(&self) -> &SpellIndex {
        &self.index
    }

    pub fn params(&self) -> ScoreParams {
        self.params
    }

    /// Per-character scores of a word (case-insensitive), memoized.
    pub fn word_scores(&self, word: &str) -> Arc<[f64]> {
        let key = word.to_ascii_lowercase();
        if let Some(s) = self.words.read().expect("poisoned").get(&key) {
            return Arc::clone(s);
        }
        let scores: Arc<[f64]> = word_character_trace(&key, &self.index, &self.params).scores.into();
        self.words
            .write()
            .expect("poisoned")
            .insert(key, Arc::clone(&scores));
        scores
    }

    /// Score of a non-word character following `preceding`, memoized.
    pub fn nonword_score(&self, preceding: Option<&str>) -> f64 {
        let Some(word) = preceding else { return 0.0 };
        let key = word.to_ascii_lowercase();
        if let Some(&s) = self.appended.read().expect("poisoned").get(&key) {
            return s;
        }
        let s = nonword_character_score(Some(&key), &self.index, self.params.delta);
        self.appended.write().expect("poisoned").insert(key, s);
        s
    }

    /// Scores the characters of `range`. Words crossing the window edge are
    /// scored whole; a non-word character only looks at a word that ends
    /// right before it inside the window.
    pub fn score_window(&self, text: &TokenizedText, range: Range<usize>) -> ScoreVector {
        let mut scores = Vec::with_capacity(range.len());
        for i in range.clone() {
            let s = match text.token_at(i) {
                Token::Word { start, text: w, .. } => self.word_scores(w)[i - start],
                Token::NonWord { .. } => {
                    let pre = if i > range.start {
                        text.word_ending_before(i)
                    } else {
                        None
                    };
                    self.nonword_score(pre)
                }
            };
            scores.push(s);
        }
        ScoreVector {
            scores,
            params: self.params,
        }
    }
}

/// Word character score: stars each position in turn, finds the character
/// whose loss leaves the fewest candidates, then repeats with that character
/// already starred at distance 2. `word` must be lowercase.
pub fn word_character_score(word: &str, index: &SpellIndex, params: &ScoreParams) -> Vec<f64> {
    word_character_trace(word, index, params).scores
}

pub fn word_character_trace(word: &str, index: &SpellIndex, params: &ScoreParams) -> WordScoreTrace {
    let n = word.len();
    let mut trace = WordScoreTrace {
        word: word.to_string(),
        first_counts: vec![0; n],
        first: None,
        second_counts: vec![None; n],
        second: None,
        scores: vec![0.0; n],
    };
    if n == 0 || n > MAX_SCORED_WORD || !index.contains(word) {
        return trace;
    }
    let count = |positions: &[usize], d: usize| {
        let p = Pattern::masked(word, positions).expect("alphabetic word");
        let c = index.candidates(&p, d);
        if c.contains(word) {
            c.len()
        } else {
            0
        }
    };

    for i in 0..n {
        trace.first_counts[i] = count(&[i], 1);
    }
    let l1 = argmin(trace.first_counts.iter().copied().enumerate());
    trace.first = Some(l1);
    trace.scores[l1] = params.pick(trace.first_counts[l1]);
    if n == 1 {
        return trace;
    }

    for j in (0..n).filter(|&j| j != l1) {
        trace.second_counts[j] = Some(count(&[l1, j], 2));
    }
    let l2 = argmin(
        trace
            .second_counts
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.map(|c| (j, c))),
    );
    trace.second = Some(l2);
    trace.scores[l2] = params.pick(trace.second_counts[l2].unwrap_or(0));

    for k in (0..n).filter(|&k| k != l1 && k != l2) {
        let c = trace.second_counts[k].unwrap_or(0);
        trace.scores[k] = if c == 0 { 0.0 } else { -params.gamma / c as f64 };
    }
    trace
}

/// Non-word character score: `-delta / |S(w*, 1)|`, or 0 without a
/// preceding word or without candidates.
pub fn nonword_character_score(preceding: Option<&str>, index: &SpellIndex, delta: f64) -> f64 {
    let Some(word) = preceding else { return 0.0 };
    let Ok(p) = Pattern::appended(word) else { return 0.0 };
    let k = index.candidates(&p, 1).len();
    if k == 0 {
        0.0
    } else {
        -delta / k as f64
    }
}

/// Position of the smallest count; the lowest position wins ties.
fn argmin(items: impl Iterator<Item = (usize, usize)>) -> usize {
    let mut best: Option<(usize, usize)> = None;
    for (i, c) in items {
        if best.is_none_or(|(_, bc)| c < bc) {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| i).expect("non-empty")
}
