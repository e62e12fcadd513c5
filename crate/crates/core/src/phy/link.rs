use std::sync::Arc;

use super::{awgn, qpsk_llr, qpsk_modulate, ChannelConfig, LdpcCode, PhyError, LLR_MAX};

/// How many QPSK symbols a frame may use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolBudget {
    /// Zero-pad the frame to whole codewords and send every codeword bit.
    Natural,
    /// `ceil(value * text characters)` symbols. The last codeword is
    /// shortened, and each codeword's info-plus-parity buffer is repeated or
    /// truncated circularly to its share of the budget. The receiver is told
    /// the frame length so it can mark the shortened bits as known zeros.
    PerCharacter(f64),
}

impl SymbolBudget {
    pub fn validate(&self) -> Result<(), PhyError> {
        match *self {
            SymbolBudget::PerCharacter(v) if !(v.is_finite() && v > 0.0) => Err(PhyError::Budget(v)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkOutput {
    /// Decoded message bits: whole codewords in natural mode, exactly the
    /// frame length under a budget.
    pub bits: Vec<u8>,
    pub symbols: usize,
    pub codewords: usize,
    /// Every codeword satisfied all parity checks.
    pub converged: bool,
    pub iterations: usize,
}

/// Encoder, modem, channel and decoder for whole frames.
#[derive(Debug, Clone)]
pub struct Link {
    code: Arc<LdpcCode>,
    max_iterations: usize,
}

impl Link {
    pub fn new(code: Arc<LdpcCode>, max_iterations: usize) -> Self {
        Self { code, max_iterations }
    }

    pub fn code(&self) -> &LdpcCode {
        &self.code
    }

    /// Symbols used for a frame of `frame_bits` bits carrying a text of
    /// `text_chars` characters.
    pub fn symbol_count(&self, frame_bits: usize, text_chars: usize, budget: SymbolBudget) -> usize {
        match budget {
            SymbolBudget::Natural => self.codeword_count(frame_bits) * self.code.n().div_ceil(2),
            SymbolBudget::PerCharacter(v) => ((v * text_chars as f64).ceil() as usize).max(1),
        }
    }

    fn codeword_count(&self, frame_bits: usize) -> usize {
        frame_bits.div_ceil(self.code.k()).max(1)
    }

    pub fn transmit(
        &self,
        frame_bits: &[u8],
        text_chars: usize,
        budget: SymbolBudget,
        channel: &ChannelConfig,
    ) -> Result<LinkOutput, PhyError> {
        budget.validate()?;
        match budget {
            SymbolBudget::Natural => self.transmit_natural(frame_bits, channel),
            SymbolBudget::PerCharacter(_) => {
                let symbols = self.symbol_count(frame_bits.len(), text_chars, budget);
                self.transmit_budget(frame_bits, symbols, channel)
            }
        }
    }

    fn transmit_natural(&self, frame_bits: &[u8], channel: &ChannelConfig) -> Result<LinkOutput, PhyError> {
        let (n, k) = (self.code.n(), self.code.k());
        let ncw = self.codeword_count(frame_bits.len());
        let mut padded = frame_bits.to_vec();
        padded.resize(ncw * k, 0);
        let mut coded = Vec::with_capacity(ncw * n);
        for block in padded.chunks(k) {
            coded.extend(self.code.encode(block)?);
        }
        let x = qpsk_modulate(&coded);
        let llr = qpsk_llr(&awgn(&x, channel), channel);
        let mut out = LinkOutput {
            bits: Vec::with_capacity(ncw * k),
            symbols: x.len(),
            codewords: ncw,
            converged: true,
            iterations: 0,
        };
        for block in llr[..ncw * n].chunks(n) {
            let d = self.code.decode(block, self.max_iterations)?;
            out.converged &= d.converged;
            out.iterations = out.iterations.max(d.iterations);
            out.bits.extend(d.message);
        }
        Ok(out)
    }

    fn transmit_budget(&self, frame_bits: &[u8], symbols: usize, channel: &ChannelConfig) -> Result<LinkOutput, PhyError> {
        let (n, k) = (self.code.n(), self.code.k());
        let ncw = self.codeword_count(frame_bits.len());
        let used: Vec<usize> = (0..ncw)
            .map(|i| frame_bits.len().saturating_sub(i * k).min(k))
            .collect();
        let buffers: Vec<Vec<usize>> = used
            .iter()
            .map(|&u| {
                let info = &self.code.info_positions()[..u];
                info.iter().chain(self.code.parity_positions()).copied().collect()
            })
            .collect();
        let total_bits = 2 * symbols;
        let shares = split_proportional(total_bits, &buffers.iter().map(Vec::len).collect::<Vec<_>>());

        let mut sent = Vec::with_capacity(total_bits);
        for (i, buf) in buffers.iter().enumerate() {
            let mut msg = vec![0u8; k];
            let start = i * k;
            msg[..used[i]].copy_from_slice(&frame_bits[start..start + used[i]]);
            let c = self.code.encode(&msg)?;
            sent.extend((0..shares[i]).map(|t| c[buf[t % buf.len()]]));
        }
        debug_assert_eq!(sent.len(), total_bits);
        let x = qpsk_modulate(&sent);
        let llr = qpsk_llr(&awgn(&x, channel), channel);

        let mut out = LinkOutput {
            bits: Vec::with_capacity(frame_bits.len()),
            symbols: x.len(),
            codewords: ncw,
            converged: true,
            iterations: 0,
        };
        let mut offset = 0;
        for (i, buf) in buffers.iter().enumerate() {
            let mut acc = vec![0.0; n];
            for &pos in &self.code.info_positions()[used[i]..] {
                acc[pos] = LLR_MAX;
            }
            for t in 0..shares[i] {
                acc[buf[t % buf.len()]] += llr[offset + t];
            }
            offset += shares[i];
            let d = self.code.decode(&acc, self.max_iterations)?;
            out.converged &= d.converged;
            out.iterations = out.iterations.max(d.iterations);
            out.bits.extend_from_slice(&d.message[..used[i]]);
        }
        Ok(out)
    }
}

/// Splits `total` in proportion to `weights`; the remainder goes one unit at a
/// time to the earliest entries.
fn split_proportional(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut shares: Vec<usize> = weights
        .iter()
        .map(|&w| (total as u128 * w as u128 / sum as u128) as usize)
        .collect();
    let rest = total - shares.iter().sum::<usize>();
    for s in shares.iter_mut().take(rest) {
        *s += 1;
    }
    shares
}
