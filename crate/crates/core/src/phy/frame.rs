use crate::ice::{index_bits, FilterBank, KeepRatio, PuncturedText};

use super::{push_bits, read_bits, source_encode, PhyError, CHAR_BITS};

pub const FRAME_VERSION: u8 = 1;
pub const HEADER_BITS: usize = 32;

const WINDOW_COUNT_BITS: usize = 12;
const INDEX_WIDTH_BITS: usize = 4;

/// Wire form of a punctured text.
///
/// ```text
/// version:4 | window_count:12 | keep_ratio_code:8 | index_bits:4 | tail:1 | reserved:3
/// filter indices: window_count x index_bits
/// payload: 7 bits per kept character
/// ```
///
/// The payload runs until a zero code or until fewer than 7 bits remain, so
/// zero padding after it is harmless.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub keep: KeepRatio,
    /// `ceil(log2 M)`.
    pub index_bits: u8,
    pub tail_unpunctured: bool,
    pub filter_indices: Vec<u32>,
    pub payload: String,
}

impl Frame {
    pub fn from_punctured(text: &PuncturedText, bank: &FilterBank) -> Self {
        Self {
            keep: bank.keep(),
            index_bits: index_bits(bank.len()) as u8,
            tail_unpunctured: text.tail_unpunctured,
            filter_indices: text.filter_indices().into_iter().map(|i| i as u32).collect(),
            payload: text.payload(),
        }
    }

    pub fn window_count(&self) -> usize {
        self.filter_indices.len()
    }

    /// Serialized length before padding.
    pub fn bit_len(&self) -> usize {
        HEADER_BITS + self.window_count() * usize::from(self.index_bits) + self.payload.len() * CHAR_BITS
    }

    pub fn serialize(&self) -> Result<Vec<u8>, PhyError> {
        let windows = self.window_count();
        if windows >= 1 << WINDOW_COUNT_BITS {
            return Err(PhyError::FieldOverflow {
                field: "window_count",
                value: windows,
            });
        }
        let width = usize::from(self.index_bits);
        if width >= 1 << INDEX_WIDTH_BITS {
            return Err(PhyError::FieldOverflow {
                field: "index_bits",
                value: width,
            });
        }
        let mut bits = Vec::with_capacity(self.bit_len());
        push_bits(&mut bits, u64::from(FRAME_VERSION), 4);
        push_bits(&mut bits, windows as u64, WINDOW_COUNT_BITS);
        push_bits(&mut bits, u64::from(self.keep.code()), 8);
        push_bits(&mut bits, width as u64, INDEX_WIDTH_BITS);
        push_bits(&mut bits, u64::from(self.tail_unpunctured), 1);
        push_bits(&mut bits, 0, 3);
        for &i in &self.filter_indices {
            if u64::from(i) >> width != 0 {
                return Err(PhyError::FieldOverflow {
                    field: "filter_index",
                    value: i as usize,
                });
            }
            push_bits(&mut bits, u64::from(i), width);
        }
        bits.extend(source_encode(&self.payload)?);
        Ok(bits)
    }

    /// Serialized frame followed by zeros up to a multiple of `block` bits.
    pub fn serialize_padded(&self, block: usize) -> Result<Vec<u8>, PhyError> {
        let mut bits = self.serialize()?;
        bits.resize(bits.len().next_multiple_of(block.max(1)), 0);
        Ok(bits)
    }

    pub fn deserialize(bits: &[u8]) -> Result<Self, PhyError> {
        Self::parse(bits, true)
    }

    /// For a receiver that knows the frame length: `bits` is exactly the
    /// frame, and every 7-bit code after the indices is payload, zero codes
    /// included.
    pub fn deserialize_exact(bits: &[u8]) -> Result<Self, PhyError> {
        Self::parse(bits, false)
    }

    fn parse(bits: &[u8], stop_at_zero: bool) -> Result<Self, PhyError> {
        if bits.len() < HEADER_BITS {
            return Err(PhyError::Truncated {
                needed: HEADER_BITS,
                available: bits.len(),
            });
        }
        let mut pos = 0;
        let version = read_bits(bits, &mut pos, 4)? as u8;
        if version != FRAME_VERSION {
            return Err(PhyError::Version(version));
        }
        let windows = read_bits(bits, &mut pos, WINDOW_COUNT_BITS)? as usize;
        let code = read_bits(bits, &mut pos, 8)? as u8;
        let keep = KeepRatio::from_code(code).map_err(|_| PhyError::FieldOverflow {
            field: "keep_ratio_code",
            value: 0,
        })?;
        let width = read_bits(bits, &mut pos, INDEX_WIDTH_BITS)? as usize;
        let tail_unpunctured = read_bits(bits, &mut pos, 1)? == 1;
        read_bits(bits, &mut pos, 3)?;
        let filter_indices = (0..windows)
            .map(|_| read_bits(bits, &mut pos, width).map(|v| v as u32))
            .collect::<Result<Vec<_>, _>>()?;
        let mut payload = String::new();
        while bits.len() - pos >= CHAR_BITS {
            let c = read_bits(bits, &mut pos, CHAR_BITS)? as u8;
            if c == 0 && stop_at_zero {
                break;
            }
            payload.push(char::from(c));
        }
        Ok(Self {
            keep,
            index_bits: width as u8,
            tail_unpunctured,
            filter_indices,
            payload,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Frame {
        Frame {
            keep: KeepRatio::new(0.9).unwrap(),
            index_bits: 6,
            tail_unpunctured: true,
            filter_indices: vec![5, 63, 0],
            payload: "Hi there".into(),
        }
    }

    #[test]
    fn header_layout() {
        let bits = sample().serialize().unwrap();
        assert_eq!(bits.len(), 32 + 18 + 56);
        let expect: Vec<u8> = "0001 000000000011 11100110 0110 1 000"
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c as u8 - b'0')
            .collect();
        assert_eq!(&bits[..32], &expect[..]);
        // first index 5 in six bits
        assert_eq!(&bits[32..38], &[0, 0, 0, 1, 0, 1]);
        // 'H' = 0x48
        assert_eq!(&bits[50..57], &[1, 0, 0, 1, 0, 0, 0]);
    }

    #[test]
    fn padding_is_ignored() {
        let f = sample();
        let bits = f.serialize_padded(324).unwrap();
        assert_eq!(bits.len(), 324);
        assert_eq!(Frame::deserialize(&bits).unwrap(), f);
    }

    #[test]
    fn exact_length_keeps_zero_codes() {
        let f = sample();
        let mut bits = f.serialize().unwrap();
        let at = bits.len() - 2 * CHAR_BITS;
        bits[at..at + CHAR_BITS].fill(0);
        let exact = Frame::deserialize_exact(&bits).unwrap();
        assert_eq!(exact.payload.len(), f.payload.len());
        assert_eq!(exact.payload.as_bytes()[f.payload.len() - 2], 0);
        assert_eq!(Frame::deserialize(&bits).unwrap().payload.len(), f.payload.len() - 2);
    }

    #[test]
    fn rejects_bad_frames() {
        assert!(matches!(Frame::deserialize(&[0; 10]), Err(PhyError::Truncated { .. })));
        assert!(matches!(Frame::deserialize(&[0; 40]), Err(PhyError::Version(0))));
        let mut f = sample();
        f.filter_indices[0] = 64;
        assert!(f.serialize().is_err());
        let mut f = sample();
        f.filter_indices = vec![0; 4096];
        assert!(f.serialize().is_err());
    }

    proptest! {
        #[test]
        fn round_trip(
            code in 1u8..=255,
            width in 0u8..=15,
            tail in any::<bool>(),
            raw in proptest::collection::vec(any::<u32>(), 0..20),
            payload in "[ -)+-~\n]{0,60}",
            pad in 0usize..20,
        ) {
            let mask = if width == 0 { 0 } else { u32::MAX >> (32 - u32::from(width)) };
            let f = Frame {
                keep: KeepRatio::from_code(code).unwrap(),
                index_bits: width,
                tail_unpunctured: tail,
                filter_indices: raw.into_iter().map(|v| v & mask).collect(),
                payload,
            };
            let mut bits = f.serialize().unwrap();
            prop_assert_eq!(bits.len(), f.bit_len());
            bits.extend(std::iter::repeat_n(0, pad));
            prop_assert_eq!(Frame::deserialize(&bits).unwrap(), f);
        }
    }
}
