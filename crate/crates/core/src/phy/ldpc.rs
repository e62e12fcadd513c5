use std::path::Path;

use super::PhyError;

/// Largest LLR magnitude the decoder produces or accepts.
pub const LLR_MAX: f64 = 50.0;

const BUNDLED_ALIST: &str = include_str!("../../assets/ldpc_648_r12.alist");

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn xor_with(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn parity_and(&self, other: &[u64]) -> u8 {
        let ones: u32 = self.0.iter().zip(other).map(|(a, b)| (a & b).count_ones()).sum();
        (ones & 1) as u8
    }
}

/// Binary LDPC code given by a sparse parity-check matrix.
///
/// Codewords are laid out `[message | parity]` when the last `n - k` columns
/// of `H` are independent (true of the bundled code); otherwise the message
/// occupies whichever columns the elimination leaves free.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    n: usize,
    checks: Vec<Vec<usize>>,
    vars: Vec<Vec<usize>>,
    info_cols: Vec<usize>,
    parity_cols: Vec<usize>,
    /// One row per parity column: which message bits it sums.
    parity_rows: Vec<BitRow>,
}

/// Output of belief-propagation decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub codeword: Vec<u8>,
    pub message: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

impl LdpcCode {
    pub fn bundled() -> Self {
        Self::from_alist(BUNDLED_ALIST).expect("bundled parity-check matrix is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, PhyError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_alist(&text)
    }

    /// Parses the alist format. Entry lines may be zero-padded to the maximum
    /// degree or not.
    pub fn from_alist(text: &str) -> Result<Self, PhyError> {
        let bad = |msg: String| PhyError::Alist(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut numbers = |what: &str| -> Result<Vec<usize>, PhyError> {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("unexpected end while reading {what}")))?;
            line.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| bad(format!("not a number: {t:?}"))))
                .collect()
        };
        let dims = numbers("dimensions")?;
        let [n, m] = dims[..] else {
            return Err(bad("first line must hold n and m".into()));
        };
        if n == 0 || m == 0 || m >= n {
            return Err(bad(format!("bad dimensions {n} x {m}")));
        }
        numbers("maximum degrees")?;
        let col_deg = numbers("column degrees")?;
        let row_deg = numbers("row degrees")?;
        if col_deg.len() != n || row_deg.len() != m {
            return Err(bad("degree lists have the wrong length".into()));
        }
        let mut vars = Vec::with_capacity(n);
        for (j, &d) in col_deg.iter().enumerate() {
            let entries: Vec<usize> = numbers("column entries")?.into_iter().filter(|&r| r != 0).collect();
            if entries.len() != d || entries.iter().any(|&r| r > m) {
                return Err(bad(format!("column {j} entries do not match its degree")));
            }
            vars.push(entries.into_iter().map(|r| r - 1).collect::<Vec<_>>());
        }
        let mut checks = Vec::with_capacity(m);
        for (i, &d) in row_deg.iter().enumerate() {
            let entries: Vec<usize> = numbers("row entries")?.into_iter().filter(|&c| c != 0).collect();
            if entries.len() != d || entries.iter().any(|&c| c > n) {
                return Err(bad(format!("row {i} entries do not match its degree")));
            }
            checks.push(entries.into_iter().map(|c| c - 1).collect::<Vec<_>>());
        }
        for (i, row) in checks.iter().enumerate() {
            for &j in row {
                if !vars[j].contains(&i) {
                    return Err(bad(format!("row {i} and column {j} disagree")));
                }
            }
        }
        let edges_by_col: usize = vars.iter().map(Vec::len).sum();
        let edges_by_row: usize = checks.iter().map(Vec::len).sum();
        if edges_by_col != edges_by_row {
            return Err(bad("row and column lists disagree".into()));
        }
        Ok(Self::build(n, checks, vars))
    }

    fn build(n: usize, checks: Vec<Vec<usize>>, vars: Vec<Vec<usize>>) -> Self {
        let mut rows: Vec<BitRow> = checks
            .iter()
            .map(|c| {
                let mut r = BitRow::zeros(n);
                for &j in c {
                    r.set(j);
                }
                r
            })
            .collect();
        // reduced row echelon form, pivots searched from the rightmost column
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in (0..n).rev() {
            if rank == rows.len() {
                break;
            }
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_with(&pivot);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        let is_parity: Vec<bool> = {
            let mut v = vec![false; n];
            for &c in &pivots {
                v[c] = true;
            }
            v
        };
        let info_cols: Vec<usize> = (0..n).filter(|&c| !is_parity[c]).collect();
        let k = info_cols.len();
        let mut order: Vec<(usize, usize)> = pivots.iter().copied().enumerate().map(|(r, c)| (c, r)).collect();
        order.sort_unstable();
        let mut parity_cols = Vec::with_capacity(rank);
        let mut parity_rows = Vec::with_capacity(rank);
        for (col, r) in order {
            let mut pr = BitRow::zeros(k);
            for (i, &ic) in info_cols.iter().enumerate() {
                if rows[r].get(ic) {
                    pr.set(i);
                }
            }
            parity_cols.push(col);
            parity_rows.push(pr);
        }
        Self {
            n,
            checks,
            vars,
            info_cols,
            parity_cols,
            parity_rows,
        }
    }

    /// Codeword length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Message length.
    pub fn k(&self) -> usize {
        self.info_cols.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    /// Codeword positions carrying the message, in message order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_cols
    }

    pub fn parity_positions(&self) -> &[usize] {
        &self.parity_cols
    }

    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, PhyError> {
        if message.len() != self.k() {
            return Err(PhyError::Length {
                expected: self.k(),
                actual: message.len(),
            });
        }
        let mut packed = BitRow::zeros(self.k());
        for (i, &b) in message.iter().enumerate() {
            if b & 1 == 1 {
                packed.set(i);
            }
        }
        let mut c = vec![0u8; self.n];
        for (&col, &b) in self.info_cols.iter().zip(message) {
            c[col] = b & 1;
        }
        for (&col, row) in self.parity_cols.iter().zip(&self.parity_rows) {
            c[col] = row.parity_and(&packed.0);
        }
        Ok(c)
    }

    /// `H c^T`, one bit per check.
    pub fn syndrome(&self, codeword: &[u8]) -> Vec<u8> {
        self.checks
            .iter()
            .map(|c| c.iter().fold(0, |acc, &j| acc ^ (codeword[j] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, codeword: &[u8]) -> bool {
        codeword.len() == self.n && self.checks.iter().all(|c| c.iter().fold(0, |acc, &j| acc ^ codeword[j]) == 0)
    }

    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_cols.iter().map(|&c| codeword[c]).collect()
    }

    /// Sum-product decoding with the tanh rule. Positive LLRs favour 0.
    pub fn decode(&self, llrs: &[f64], max_iterations: usize) -> Result<Decoded, PhyError> {
        if llrs.len() != self.n {
            return Err(PhyError::Length {
                expected: self.n,
                actual: llrs.len(),
            });
        }
        let channel: Vec<f64> = llrs.iter().map(|&l| l.clamp(-LLR_MAX, LLR_MAX)).collect();
        let mut hard: Vec<u8> = channel.iter().map(|&l| u8::from(l < 0.0)).collect();
        if self.is_codeword(&hard) {
            return Ok(self.finish(hard, true, 0));
        }

        // edge e of check i is checks[i][e - offsets[i]]
        let mut offsets = Vec::with_capacity(self.checks.len());
        let mut total = 0;
        for c in &self.checks {
            offsets.push(total);
            total += c.len();
        }
        let mut var_edges: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (i, c) in self.checks.iter().enumerate() {
            for (e, &j) in c.iter().enumerate() {
                var_edges[j].push(offsets[i] + e);
            }
        }
        let mut q: Vec<f64> = vec![0.0; total];
        for (i, c) in self.checks.iter().enumerate() {
            for (e, &j) in c.iter().enumerate() {
                q[offsets[i] + e] = channel[j];
            }
        }
        let mut r = vec![0.0; total];
        let mut t = Vec::new();
        let mut prefix = Vec::new();

        for iteration in 1..=max_iterations {
            for (i, c) in self.checks.iter().enumerate() {
                let base = offsets[i];
                let d = c.len();
                t.clear();
                t.extend((0..d).map(|e| (q[base + e] / 2.0).tanh()));
                prefix.clear();
                prefix.push(1.0);
                for e in 0..d {
                    let p = prefix[e] * t[e];
                    prefix.push(p);
                }
                let mut suffix = 1.0;
                for e in (0..d).rev() {
                    let prod = (prefix[e] * suffix).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                    r[base + e] = (2.0 * prod.atanh()).clamp(-LLR_MAX, LLR_MAX);
                    suffix *= t[e];
                }
            }
            for (j, edges) in var_edges.iter().enumerate() {
                let sum: f64 = channel[j] + edges.iter().map(|&e| r[e]).sum::<f64>();
                hard[j] = u8::from(sum < 0.0);
                for &e in edges {
                    q[e] = (sum - r[e]).clamp(-LLR_MAX, LLR_MAX);
                }
            }
            if self.is_codeword(&hard) {
                return Ok(self.finish(hard, true, iteration));
            }
        }
        Ok(self.finish(hard, false, max_iterations))
    }

    fn finish(&self, codeword: Vec<u8>, converged: bool, iterations: usize) -> Decoded {
        Decoded {
            message: self.extract_message(&codeword),
            codeword,
            converged,
            iterations,
        }
    }

    /// Variable-node degrees, for diagnostics.
    pub fn column_degrees(&self) -> Vec<usize> {
        self.vars.iter().map(Vec::len).collect()
    }
}
