//! Receiver side: re-inserting `*` at punctured positions and filling them in.

mod dictionary;
mod llm;

pub use dictionary::{recover_deterministic, DictionaryRecoverer};
pub use llm::{project_reply, validate_reply, LlmConfig, LlmFlavor, LlmRecoverer, PROMPT_SYSTEM_V1, PROMPT_VERSION};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::is_supported;
use crate::ice::FilterBank;
use crate::phy::Frame;

pub const STAR: char = '*';

/// Stands in for received codes that are not printable text (and for a
/// received `*`, which would otherwise be mistaken for a marker).
pub const REPLACEMENT: char = '?';

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecoverError {
    #[error("frame does not fit the filter bank: expected {expected} characters, got {actual}")]
    BrokenFrame { expected: usize, actual: usize },
    #[error("filter index {index} outside a bank of {filters}")]
    BadFilterIndex { index: usize, filters: usize },
    #[error("frame header disagrees with the configured bank: {0}")]
    HeaderMismatch(String),
    #[error("recovery endpoint unavailable: {0}")]
    EndpointUnavailable(String),
    #[error("malformed reply: {0}")]
    MalformedReply(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowProvenance {
    pub filter_index: usize,
    pub punctured: bool,
}

/// Received text with `*` at every position a filter dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatedText {
    text: String,
    stars: Vec<usize>,
    windows: Vec<WindowProvenance>,
}

impl IndicatedText {
    /// Builds an indicated text directly, e.g. for word omission where each
    /// `*` stands for a whole word. Star positions are read off the text.
    pub fn from_marked(text: &str) -> Self {
        Self {
            stars: star_positions(text),
            text: text.to_string(),
            windows: Vec::new(),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn stars(&self) -> &[usize] {
        &self.stars
    }

    pub fn star_count(&self) -> usize {
        self.stars.len()
    }

    pub fn windows(&self) -> &[WindowProvenance] {
        &self.windows
    }

    /// The received characters, stars removed.
    pub fn received(&self) -> String {
        self.text.chars().filter(|&c| c != STAR).collect()
    }
}

fn star_positions(text: &str) -> Vec<usize> {
    text.bytes()
        .enumerate()
        .filter(|&(_, b)| b == STAR as u8)
        .map(|(i, _)| i)
        .collect()
}

/// Replaces anything outside the supported character set with [`REPLACEMENT`].
pub fn sanitize_received(received: &str) -> String {
    received
        .chars()
        .map(|c| if is_supported(c) { c } else { REPLACEMENT })
        .collect()
}

/// Inserts `*` at every zero of each window's filter. With `tail_unpunctured`
/// the last window holds whatever characters remain, unmarked.
pub fn indicate(
    received: &str,
    indices: &[u32],
    bank: &FilterBank,
    tail_unpunctured: bool,
) -> Result<IndicatedText, RecoverError> {
    let received = sanitize_received(received);
    let bytes = received.as_bytes();
    let full_windows = if tail_unpunctured {
        indices.len().checked_sub(1).ok_or(RecoverError::BrokenFrame {
            expected: 1,
            actual: bytes.len(),
        })?
    } else {
        indices.len()
    };
    let expected = full_windows * bank.ones();
    let tail_ok = if tail_unpunctured {
        bytes.len() > expected && bytes.len() - expected < bank.window_len()
    } else {
        bytes.len() == expected
    };
    if !tail_ok {
        return Err(RecoverError::BrokenFrame {
            expected,
            actual: bytes.len(),
        });
    }

    let mut text = String::with_capacity(indices.len() * bank.window_len());
    let mut windows = Vec::with_capacity(indices.len());
    let mut pos = 0;
    for &index in &indices[..full_windows] {
        let index = index as usize;
        if index >= bank.len() {
            return Err(RecoverError::BadFilterIndex {
                index,
                filters: bank.len(),
            });
        }
        for keep in bank.filter(index).to_vec() {
            if keep == 1 {
                text.push(char::from(bytes[pos]));
                pos += 1;
            } else {
                text.push(STAR);
            }
        }
        windows.push(WindowProvenance {
            filter_index: index,
            punctured: true,
        });
    }
    if tail_unpunctured {
        text.push_str(&received[pos..]);
        windows.push(WindowProvenance {
            filter_index: indices[full_windows] as usize,
            punctured: false,
        });
    }
    Ok(IndicatedText {
        stars: star_positions(&text),
        text,
        windows,
    })
}

/// [`indicate`] for a received frame, checking its header against the bank.
pub fn indicate_frame(frame: &Frame, bank: &FilterBank) -> Result<IndicatedText, RecoverError> {
    if frame.keep != bank.keep() {
        return Err(RecoverError::HeaderMismatch(format!(
            "keep ratio code {} vs {}",
            frame.keep.code(),
            bank.keep().code()
        )));
    }
    if usize::from(frame.index_bits) != bank.index_bits() {
        return Err(RecoverError::HeaderMismatch(format!(
            "index width {} vs {}",
            frame.index_bits,
            bank.index_bits()
        )));
    }
    indicate(&frame.payload, &frame.filter_indices, bank, frame.tail_unpunctured)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Deterministic,
    Llm,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Deterministic => "deterministic",
            Backend::Llm => "llm",
        }
    }
}

/// How one `*` was resolved: `resolved` is the text put in its place (a
/// letter, a space, several characters, or nothing).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub position: usize,
    pub resolved: String,
    pub backend: Backend,
    /// Size of the candidate pool; `None` when the backend does not expose one.
    pub candidates: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredText {
    pub text: String,
    pub resolutions: Vec<Resolution>,
    pub backend: Backend,
    /// The LLM reply was unusable and the dictionary backend filled in.
    pub fallback: bool,
}

impl RecoveredText {
    /// Applies one resolution per star of `m`, in star order.
    pub(crate) fn assemble(m: &IndicatedText, resolutions: Vec<Resolution>, backend: Backend) -> Self {
        debug_assert_eq!(resolutions.len(), m.star_count());
        let mut text = String::with_capacity(m.as_str().len());
        let mut next = resolutions.iter().peekable();
        for (i, c) in m.as_str().char_indices() {
            if c == STAR {
                let r = next.next().expect("one resolution per star");
                debug_assert_eq!(r.position, i);
                text.push_str(&r.resolved);
            } else {
                text.push(c);
            }
        }
        Self {
            text,
            resolutions,
            backend,
            fallback: false,
        }
    }
}

/// A recovery backend.
pub trait Recoverer: Send + Sync {
    fn recover(&self, m: &IndicatedText) -> RecoveredText;

    fn backend(&self) -> Backend;
}
