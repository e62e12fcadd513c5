//! Physical layer: 7-bit source code, framing, LDPC, QPSK and AWGN.
//!
//! Bits are carried as one `u8` (0 or 1) per bit throughout.

mod charcode;
mod frame;
mod ldpc;
mod link;
mod modem;

pub use charcode::{source_decode, source_encode, CHAR_BITS};
pub use frame::{Frame, FRAME_VERSION, HEADER_BITS};
pub use ldpc::{Decoded, LdpcCode, LLR_MAX};
pub use link::{Link, LinkOutput, SymbolBudget};
pub use modem::{awgn, qpsk_demodulate_hard, qpsk_llr, qpsk_modulate, ChannelConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhyError {
    #[error("character {0:?} has no 7-bit code")]
    UnsupportedCharacter(char),
    #[error("expected {expected} items, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("frame truncated: needed {needed} bits, {available} available")]
    Truncated { needed: usize, available: usize },
    #[error("unknown frame version {0}")]
    Version(u8),
    #[error("frame field {field} cannot hold {value}")]
    FieldOverflow { field: &'static str, value: usize },
    #[error("malformed parity-check file: {0}")]
    Alist(String),
    #[error("symbol budget must be positive and finite, got {0}")]
    Budget(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Writes `width` low bits of `value`, most significant first.
pub(crate) fn push_bits(out: &mut Vec<u8>, value: u64, width: usize) {
    for i in (0..width).rev() {
        out.push((value >> i & 1) as u8);
    }
}

/// Reads `width` bits at `*pos` as an unsigned integer, most significant first.
pub(crate) fn read_bits(bits: &[u8], pos: &mut usize, width: usize) -> Result<u64, PhyError> {
    let end = *pos + width;
    if end > bits.len() {
        return Err(PhyError::Truncated {
            needed: end,
            available: bits.len(),
        });
    }
    let v = bits[*pos..end].iter().fold(0u64, |acc, &b| acc << 1 | u64::from(b & 1));
    *pos = end;
    Ok(v)
}
