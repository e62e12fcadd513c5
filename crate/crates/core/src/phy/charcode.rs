use crate::corpus::is_supported;

use super::{push_bits, read_bits, PhyError};

pub const CHAR_BITS: usize = 7;

/// Concatenated 7-bit codes, MSB first.
pub fn source_encode(text: &str) -> Result<Vec<u8>, PhyError> {
    let mut bits = Vec::with_capacity(text.len() * CHAR_BITS);
    for c in text.chars() {
        if !is_supported(c) {
            return Err(PhyError::UnsupportedCharacter(c));
        }
        push_bits(&mut bits, c as u64, CHAR_BITS);
    }
    Ok(bits)
}

/// Inverse of [`source_encode`]; any 7-bit code decodes, including control codes.
pub fn source_decode(bits: &[u8]) -> Result<String, PhyError> {
    if !bits.len().is_multiple_of(CHAR_BITS) {
        return Err(PhyError::Length {
            expected: bits.len().next_multiple_of(CHAR_BITS),
            actual: bits.len(),
        });
    }
    let mut pos = 0;
    let mut out = String::with_capacity(bits.len() / CHAR_BITS);
    while pos < bits.len() {
        out.push(char::from(read_bits(bits, &mut pos, CHAR_BITS)? as u8));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn capital_a() {
        assert_eq!(source_encode("A").unwrap(), vec![1, 0, 0, 0, 0, 0, 1]);
        assert!(source_encode("").unwrap().is_empty());
        assert!(matches!(source_encode("a*b"), Err(PhyError::UnsupportedCharacter('*'))));
        assert!(source_encode("caf\u{e9}").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(s in "[ -)+-~\n]{0,80}") {
            prop_assert_eq!(source_decode(&source_encode(&s).unwrap()).unwrap(), s);
        }
    }
}
