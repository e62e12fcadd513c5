//! Important character extraction.
//!
//! Each character gets a non-positive importance score: the more negative,
//! the easier the dictionary can restore it if dropped. Text is cut into
//! windows of `L_f` characters; for every full window the transmitter picks
//! the filter from a shared random bank whose kept positions carry the largest
//! total score, and only the index of that filter travels with the kept
//! characters.

mod filters;
mod puncture;
mod scores;

pub use filters::{index_bits, select_filter, select_random, Filter, FilterBank};
pub use puncture::{estimate_recovery_probability, puncture, PuncturedText, PuncturedWindow};
pub use scores::{
    nonword_character_score, word_character_score, word_character_trace, ScoreParams, ScoreVector, Scorer,
    WordScoreTrace, MAX_SCORED_WORD,
};

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::TokenizedText;
use crate::spellkit::SpellIndex;

#[derive(Debug, Error, PartialEq)]
pub enum IceError {
    #[error("keep ratio {0} outside (0, 1]")]
    KeepRatio(f64),
    #[error("score parameters must satisfy alpha > beta > gamma > 0 and delta > 0")]
    ScoreParams,
    #[error("window length must be at least 1")]
    WindowLength,
    #[error("filter bank needs at least one filter")]
    EmptyBank,
}

/// Fraction of characters kept per full window (`1/epsilon`), quantized to
/// the 8-bit code carried in the frame header: `value = code / 255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeepRatio(u8);

impl KeepRatio {
    pub const FULL: KeepRatio = KeepRatio(255);

    pub fn new(ratio: f64) -> Result<Self, IceError> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(IceError::KeepRatio(ratio));
        }
        let code = (ratio * 255.0).round().max(1.0) as u8;
        Ok(Self(code))
    }

    pub fn from_code(code: u8) -> Result<Self, IceError> {
        if code == 0 {
            return Err(IceError::KeepRatio(0.0));
        }
        Ok(Self(code))
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 255.0
    }

    /// Number of kept positions in a filter of length `window_len`.
    pub fn ones(self, window_len: usize) -> usize {
        ((window_len as f64) * self.value()).round() as usize
    }
}

/// Everything the transmitter and receiver must agree on.
#[derive(Debug, Clone, PartialEq)]
pub struct IceParams {
    pub scores: ScoreParams,
    pub window_len: usize,
    pub filters: usize,
    pub keep: KeepRatio,
    pub seed: u64,
}

impl Default for IceParams {
    fn default() -> Self {
        Self {
            scores: ScoreParams::default(),
            window_len: 40,
            filters: 64,
            keep: KeepRatio::new(0.9).expect("valid"),
            seed: 0,
        }
    }
}

impl IceParams {
    pub fn validate(&self) -> Result<(), IceError> {
        self.scores.validate()?;
        if self.window_len == 0 {
            return Err(IceError::WindowLength);
        }
        if self.filters == 0 {
            return Err(IceError::EmptyBank);
        }
        Ok(())
    }

    pub fn bank(&self) -> Result<FilterBank, IceError> {
        FilterBank::generate(self.seed, self.filters, self.window_len, self.keep)
    }
}

/// How the transmitter chooses a filter for each full window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Maximize the kept importance score.
    Proposed,
    /// Uniform choice from the same bank, seeded.
    Random(u64),
}

/// Transmitter side: scorer plus the shared filter bank.
#[derive(Debug, Clone)]
pub struct Ice {
    scorer: Arc<Scorer>,
    bank: Arc<FilterBank>,
}

impl Ice {
    pub fn new(scorer: Arc<Scorer>, bank: Arc<FilterBank>) -> Self {
        Self { scorer, bank }
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn scorer(&self) -> &Scorer {
        &self.scorer
    }

    pub fn index(&self) -> &SpellIndex {
        self.scorer.index()
    }

    /// Scores and punctures `text` window by window. The final window is sent
    /// whole when it is shorter than `L_f`.
    pub fn puncture_text(&self, text: &TokenizedText, selection: Selection) -> PuncturedText {
        let l_f = self.bank.window_len();
        let mut rng = match selection {
            Selection::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            Selection::Proposed => None,
        };
        let mut windows = Vec::new();
        let mut tail_unpunctured = false;
        let mut start = 0;
        while start < text.len() {
            let end = (start + l_f).min(text.len());
            let chars = &text.as_str()[start..end];
            if end - start < l_f {
                tail_unpunctured = true;
                windows.push(PuncturedWindow {
                    kept: chars.to_string(),
                    filter_index: 0,
                    punctured: false,
                });
            } else {
                let index = match rng.as_mut() {
                    Some(rng) => select_random(&self.bank, rng),
                    None => {
                        let scores = self.scorer.score_window(text, start..end);
                        select_filter(&scores, &self.bank)
                    }
                };
                windows.push(PuncturedWindow {
                    kept: puncture(chars, self.bank.filter(index)),
                    filter_index: index,
                    punctured: true,
                });
            }
            start = end;
        }
        PuncturedText {
            windows,
            tail_unpunctured,
        }
    }
}
