use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::LLR_MAX;

/// AWGN channel `y = h x + n` with Es/N0 given per QPSK symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    /// Es/N0 in dB; `f64::INFINITY` for a noiseless channel.
    pub snr_db: f64,
    pub h: Complex64,
    pub noise_seed: u64,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, noise_seed: u64) -> Self {
        Self {
            snr_db,
            h: Complex64::new(1.0, 0.0),
            noise_seed,
        }
    }

    /// Total complex noise variance for unit-energy symbols.
    pub fn noise_variance(&self) -> f64 {
        if self.snr_db == f64::INFINITY {
            0.0
        } else {
            10f64.powf(-self.snr_db / 10.0)
        }
    }
}

/// Gray-mapped unit-energy QPSK: `(b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt 2`.
/// An odd bit count is padded with one zero bit.
pub fn qpsk_modulate(bits: &[u8]) -> Vec<Complex64> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let level = |b: u8| if b & 1 == 0 { a } else { -a };
    bits.chunks(2)
        .map(|p| Complex64::new(level(p[0]), level(p.get(1).copied().unwrap_or(0))))
        .collect()
}

/// Adds seeded circularly-symmetric Gaussian noise of total variance `sigma^2`.
pub fn awgn(x: &[Complex64], cfg: &ChannelConfig) -> Vec<Complex64> {
    let var = cfg.noise_variance();
    if var == 0.0 {
        return x.iter().map(|&s| cfg.h * s).collect();
    }
    let scale = (var / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
    x.iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            cfg.h * s + scale * Complex64::new(re, im)
        })
        .collect()
}

/// Exact per-bit LLRs (`log P(0)/P(1)`) for the QPSK map above, two per symbol.
pub fn qpsk_llr(y: &[Complex64], cfg: &ChannelConfig) -> Vec<f64> {
    let var = cfg.noise_variance();
    let mut out = Vec::with_capacity(2 * y.len());
    for &s in y {
        let z = cfg.h.conj() * s;
        for v in [z.re, z.im] {
            let l = if var == 0.0 {
                if v >= 0.0 {
                    LLR_MAX
                } else {
                    -LLR_MAX
                }
            } else {
                2.0 * std::f64::consts::SQRT_2 * v / var
            };
            out.push(l.clamp(-LLR_MAX, LLR_MAX));
        }
    }
    out
}

/// Sign decisions on each quadrature.
pub fn qpsk_demodulate_hard(y: &[Complex64], cfg: &ChannelConfig) -> Vec<u8> {
    y.iter()
        .flat_map(|&s| {
            let z = cfg.h.conj() * s;
            [u8::from(z.re < 0.0), u8::from(z.im < 0.0)]
        })
        .collect()
}
