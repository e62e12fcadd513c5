use std::sync::Arc;

use crate::spellkit::{Pattern, SpellIndex};

use super::{Backend, IndicatedText, RecoveredText, Recoverer, Resolution, STAR};

/// Dictionary recovery: every run of letters and stars is replaced by its
/// most frequent completion.
#[derive(Debug, Clone)]
pub struct DictionaryRecoverer {
    index: Arc<SpellIndex>,
}

impl DictionaryRecoverer {
    pub fn new(index: Arc<SpellIndex>) -> Self {
        Self { index }
    }
}

impl Recoverer for DictionaryRecoverer {
    fn recover(&self, m: &IndicatedText) -> RecoveredText {
        recover_deterministic(m, &self.index)
    }

    fn backend(&self) -> Backend {
        Backend::Deterministic
    }
}

/// For each maximal run of letters and `*` holding `k >= 1` stars, the pool is
/// `S(run, k)` plus the two-word splits of the run; the most frequent entry
/// wins (a split counts as its rarer word), ties going to the
/// lexicographically smaller text. An empty pool deletes the stars.
pub fn recover_deterministic(m: &IndicatedText, index: &SpellIndex) -> RecoveredText {
    let text = m.as_str();
    let bytes = text.as_bytes();
    let mut resolutions = Vec::with_capacity(m.star_count());
    let mut i = 0;
    while i < bytes.len() {
        if !is_run_byte(bytes[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && is_run_byte(bytes[i]) {
            i += 1;
        }
        let run = &text[start..i];
        if run.contains(STAR) {
            resolutions.extend(resolve_run(text, start, run, index));
        }
    }
    RecoveredText::assemble(m, resolutions, Backend::Deterministic)
}

fn is_run_byte(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == STAR as u8
}

fn resolve_run(text: &str, start: usize, run: &str, index: &SpellIndex) -> Vec<Resolution> {
    let pattern = Pattern::new(run).expect("letters and stars only");
    let k = pattern.star_count();
    let mut pool: Vec<(u64, String)> = index
        .candidates(&pattern, k)
        .into_iter()
        .map(|w| (index.freq(&w), w))
        .collect();
    pool.extend(
        index
            .split_candidates(&pattern)
            .into_iter()
            .map(|(u, v)| (index.freq(&u).min(index.freq(&v)), format!("{u} {v}"))),
    );
    let size = pool.len();
    let best = pool
        .into_iter()
        .min_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));

    let stars: Vec<usize> = run
        .bytes()
        .enumerate()
        .filter(|&(_, b)| b == STAR as u8)
        .map(|(j, _)| j)
        .collect();
    let fills = best
        .and_then(|(_, chosen)| align(run.as_bytes(), chosen.as_bytes()))
        .unwrap_or_else(|| vec![String::new(); stars.len()]);
    let upper = uppercase_fill(text, start, run);
    stars
        .iter()
        .zip(fills)
        .map(|(&j, fill)| Resolution {
            position: start + j,
            resolved: if upper(j) { fill.to_ascii_uppercase() } else { fill },
            backend: Backend::Deterministic,
            candidates: Some(size),
        })
        .collect()
}

/// Matches `run` against `target` where each star becomes one character or
/// nothing and every letter must match (ignoring case). Returns the fill of
/// each star, preferring a one-character fill where there is a choice.
fn align(run: &[u8], target: &[u8]) -> Option<Vec<String>> {
    let (a, b) = (run.len(), target.len());
    // ok[i][j]: run[i..] can produce target[j..]
    let mut ok = vec![vec![false; b + 1]; a + 1];
    ok[a][b] = true;
    for i in (0..a).rev() {
        for j in (0..=b).rev() {
            ok[i][j] = if run[i] == STAR as u8 {
                (j < b && ok[i + 1][j + 1]) || ok[i + 1][j]
            } else {
                j < b && run[i].eq_ignore_ascii_case(&target[j]) && ok[i + 1][j + 1]
            };
        }
    }
    if !ok[0][0] {
        return None;
    }
    let mut fills = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a {
        if run[i] == STAR as u8 {
            if j < b && ok[i + 1][j + 1] {
                fills.push(char::from(target[j]).to_string());
                j += 1;
            } else {
                fills.push(String::new());
            }
        } else {
            j += 1;
        }
        i += 1;
    }
    Some(fills)
}

/// Whether a fill at offset `j` of the run should be uppercase: the run's
/// letters are all capitals, or the star opens a run that starts the text or
/// a sentence.
fn uppercase_fill<'a>(text: &'a str, start: usize, run: &'a str) -> impl Fn(usize) -> bool + 'a {
    let letters: Vec<u8> = run.bytes().filter(u8::is_ascii_alphabetic).collect();
    let shouting = letters.len() >= 2 && letters.iter().all(u8::is_ascii_uppercase);
    let before = text[..start].trim_end_matches(' ');
    let sentence_start = before.is_empty() || before.ends_with(['.', '!', '?', '\n']);
    move |j| shouting || (j == 0 && sentence_start)
}
