//! Character-punctured text transmission.
//!
//! A transmitter scores every character of a text by how easily a dictionary
//! could restore it, picks one of `M` shared random filters per window so that
//! the easiest characters are dropped, and sends the survivors through a
//! 7-bit / LDPC / QPSK / AWGN link. The receiver re-inserts `*` markers at the
//! dropped positions and a recovery backend fills them back in.
//!
//! Module map:
//!
//! * [`corpus`]: tokenization, dictionaries and corpus loading.
//! * [`spellkit`]: edit distance and the wildcard-aware candidate index.
//! * [`ice`]: importance scores, filter banks, selection and puncturing.
//! * [`phy`]: framing, LDPC coding, QPSK, AWGN and the end-to-end link.
//! * [`recover`]: missing-character indication and recovery backends.
//! * [`metrics`]: BLEU, embedding similarity and character/word accuracy.
//! * [`runner`]: run configuration, the per-sentence pipeline and sweeps.

pub mod corpus;
pub mod ice;
pub mod metrics;
pub mod phy;
pub mod recover;
pub mod runner;
pub mod spellkit;

pub use corpus::{tokenize, Dictionary, Token, TokenizedText};
pub use ice::{FilterBank, IceParams, KeepRatio, ScoreVector};
pub use phy::{ChannelConfig, Frame, LdpcCode};
pub use recover::{IndicatedText, RecoveredText};
pub use spellkit::{edit_distance, CandidateSet, Pattern, SpellIndex};

/// Small deterministic mixing helpers shared by seeding code.
pub(crate) mod seed {
    /// SplitMix64 finalizer.
    pub fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Order-sensitive combination of several words into one seed.
    pub fn combine(parts: &[u64]) -> u64 {
        parts
            .iter()
            .fold(0x5155_5254_4558_5400, |acc, &p| mix(acc ^ mix(p)))
    }
}
