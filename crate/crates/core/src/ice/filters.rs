use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{IceError, KeepRatio, ScoreVector};

/// A binary mask over a window; set bits mark transmitted positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Filter {
    bits: Vec<u64>,
    len: usize,
}

impl Filter {
    pub fn from_kept(len: usize, kept: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![0u64; len.div_ceil(64)];
        for i in kept {
            assert!(i < len, "position {i} outside filter of length {len}");
            bits[i / 64] |= 1 << (i % 64);
        }
        Self { bits, len }
    }

    pub fn all_ones(len: usize) -> Self {
        Self::from_kept(len, 0..len)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn keeps(&self, i: usize) -> bool {
        i < self.len && self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Kept positions in increasing order.
    pub fn kept_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.keeps(i))
    }

    /// `f^T s`, summed over kept positions in increasing order.
    pub fn dot(&self, scores: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (w, &word) in self.bits.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let i = w * 64 + word.trailing_zeros() as usize;
                acc += scores[i];
                word &= word - 1;
            }
        }
        acc
    }

    pub fn to_vec(&self) -> Vec<u8> {
        (0..self.len).map(|i| u8::from(self.keeps(i))).collect()
    }
}

/// `M` filters of length `L_f`, each keeping `round(L_f * keep)` positions,
/// reproducible from `(seed, M, L_f, keep)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    filters: Vec<Filter>,
    window_len: usize,
    ones: usize,
    keep: KeepRatio,
    seed: u64,
}

impl FilterBank {
    /// Filter `i` draws its positions from ChaCha8 stream `i` of `seed`.
    /// Filters are distinct whenever `C(L_f, ones) >= M`; when the space of
    /// masks is smaller than `M` (e.g. keep ratio 1), repeats are unavoidable
    /// and allowed.
    pub fn generate(seed: u64, m: usize, window_len: usize, keep: KeepRatio) -> Result<Self, IceError> {
        if m == 0 {
            return Err(IceError::EmptyBank);
        }
        if window_len == 0 {
            return Err(IceError::WindowLength);
        }
        let ones = keep.ones(window_len);
        let distinct = binomial_at_least(window_len, ones, m);
        let mut seen = HashSet::with_capacity(m);
        let mut filters = Vec::with_capacity(m);
        for i in 0..m {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let filter = loop {
                let f = Filter::from_kept(window_len, sample(&mut rng, window_len, ones));
                if !distinct || seen.insert(f.clone()) {
                    break f;
                }
            };
            filters.push(filter);
        }
        Ok(Self {
            filters,
            window_len,
            ones,
            keep,
            seed,
        })
    }

    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    pub fn filter(&self, index: usize) -> &Filter {
        &self.filters[index]
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn keep(&self) -> KeepRatio {
        self.keep
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Width of a transmitted filter index, `ceil(log2 M)`.
    pub fn index_bits(&self) -> usize {
        index_bits(self.filters.len())
    }
}

pub fn index_bits(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        (usize::BITS - (m - 1).leading_zeros()) as usize
    }
}

/// The bank filter maximizing `f^T s`; the lowest index wins ties.
pub fn select_filter(scores: &ScoreVector, bank: &FilterBank) -> usize {
    assert_eq!(scores.len(), bank.window_len(), "score vector must span a full window");
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, f) in bank.filters().iter().enumerate() {
        let v = f.dot(&scores.scores);
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// A uniformly chosen bank index.
pub fn select_random<R: Rng>(bank: &FilterBank, rng: &mut R) -> usize {
    rng.random_range(0..bank.len())
}

/// Whether `C(n, k) >= target`, without overflow.
fn binomial_at_least(n: usize, k: usize, target: usize) -> bool {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc >= target as u128 {
            return true;
        }
    }
    acc >= target as u128
}
