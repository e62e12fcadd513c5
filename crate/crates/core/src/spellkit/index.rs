use std::collections::HashMap;

use crate::corpus::Dictionary;

use super::{bounded_edit_distance, CandidateSet, Pattern, STAR};

/// Deletion depth of the index. Queries up to this distance use it directly;
/// larger distances fall back to the length buckets.
const INDEXED_DISTANCE: usize = 2;

/// Candidate index over a dictionary.
///
/// Every word is stored under each string obtained by deleting up to two of
/// its characters. If `ed(p, v) <= d` then some string is reachable from both
/// `p` and `v` by at most `d` deletions, and since no dictionary word holds a
/// `*`, the `p` side must delete every star. A query therefore only probes the
/// star-free deletion variants of the pattern and verifies the hits.
#[derive(Debug, Clone)]
pub struct SpellIndex {
    words: Vec<String>,
    freq: Vec<u64>,
    ids: HashMap<String, u32>,
    deletions: HashMap<Box<[u8]>, Vec<u32>>,
    by_len: Vec<Vec<u32>>,
}

impl SpellIndex {
    pub fn new(dict: &Dictionary) -> Self {
        let words: Vec<String> = dict.words().to_vec();
        let freq: Vec<u64> = words.iter().map(|w| dict.freq(w)).collect();
        let mut ids = HashMap::with_capacity(words.len());
        let mut deletions: HashMap<Box<[u8]>, Vec<u32>> = HashMap::new();
        let mut by_len: Vec<Vec<u32>> = Vec::new();
        for (id, w) in words.iter().enumerate() {
            let id = id as u32;
            ids.insert(w.clone(), id);
            if by_len.len() <= w.len() {
                by_len.resize(w.len() + 1, Vec::new());
            }
            by_len[w.len()].push(id);
            let mut variants = Vec::new();
            deletion_variants(w.as_bytes(), INDEXED_DISTANCE, &mut variants);
            variants.sort();
            variants.dedup();
            for v in variants {
                deletions.entry(v.into_boxed_slice()).or_default().push(id);
            }
        }
        Self {
            words,
            freq,
            ids,
            deletions,
            by_len,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.ids.contains_key(word)
    }

    pub fn freq(&self, word: &str) -> u64 {
        self.ids.get(word).map_or(0, |&id| self.freq[id as usize])
    }

    /// `S(p, d)`: every dictionary word within edit distance `d` of `p`.
    pub fn candidates(&self, p: &Pattern, d: usize) -> CandidateSet {
        let pattern = p.as_bytes();
        let mut hits: Vec<u32> = if d <= INDEXED_DISTANCE {
            self.probe(pattern, p.star_count(), d)
        } else {
            self.bucket_hits(pattern, d)
        };
        hits.sort_unstable();
        hits.dedup();
        hits.retain(|&id| {
            bounded_edit_distance(pattern, self.words[id as usize].as_bytes(), d).is_some()
        });
        self.ordered(hits)
    }

    /// Reference implementation: checks every word in the dictionary.
    pub fn scan(&self, p: &Pattern, d: usize) -> CandidateSet {
        let hits = (0..self.words.len() as u32)
            .filter(|&id| {
                bounded_edit_distance(p.as_bytes(), self.words[id as usize].as_bytes(), d)
                    .is_some()
            })
            .collect();
        self.ordered(hits)
    }

    /// Word pairs `(u, v)` such that turning one `*` of `p` into a space and
    /// letting each remaining `*` stand for exactly one letter spells `"u v"`.
    /// Sorted lexicographically.
    pub fn split_candidates(&self, p: &Pattern) -> Vec<(String, String)> {
        let bytes = p.as_bytes();
        let mut out = Vec::new();
        for (i, _) in bytes.iter().enumerate().filter(|(_, &b)| b == STAR) {
            let (left, right) = (&bytes[..i], &bytes[i + 1..]);
            if left.is_empty() || right.is_empty() {
                continue;
            }
            let lefts = self.wildcard_matches(left);
            if lefts.is_empty() {
                continue;
            }
            let rights = self.wildcard_matches(right);
            for &l in &lefts {
                for &r in &rights {
                    out.push((self.words[l as usize].clone(), self.words[r as usize].clone()));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Same-length words equal to `pattern` at every non-star position.
    pub fn wildcard_matches(&self, pattern: &[u8]) -> Vec<u32> {
        if !pattern.contains(&STAR) {
            let word = std::str::from_utf8(pattern).unwrap_or_default();
            return self.ids.get(word).copied().into_iter().collect();
        }
        let Some(bucket) = self.by_len.get(pattern.len()) else {
            return Vec::new();
        };
        bucket
            .iter()
            .copied()
            .filter(|&id| {
                let w = self.words[id as usize].as_bytes();
                pattern.iter().zip(w).all(|(&p, &c)| p == STAR || p == c)
            })
            .collect()
    }

    fn probe(&self, pattern: &[u8], stars: usize, d: usize) -> Vec<u32> {
        if stars > d {
            return Vec::new();
        }
        let star_pos: Vec<usize> = (0..pattern.len()).filter(|&i| pattern[i] == STAR).collect();
        let letter_pos: Vec<usize> = (0..pattern.len()).filter(|&i| pattern[i] != STAR).collect();
        let mut hits = Vec::new();
        let mut removed = star_pos.clone();
        for extra in 0..=(d - stars) {
            for_each_subset(&letter_pos, extra, &mut |subset| {
                removed.truncate(star_pos.len());
                removed.extend_from_slice(subset);
                let key: Vec<u8> = (0..pattern.len())
                    .filter(|i| !removed.contains(i))
                    .map(|i| pattern[i])
                    .collect();
                if let Some(ids) = self.deletions.get(key.as_slice()) {
                    hits.extend_from_slice(ids);
                }
            });
        }
        hits
    }

    fn bucket_hits(&self, pattern: &[u8], d: usize) -> Vec<u32> {
        let lo = pattern.len().saturating_sub(d);
        let hi = (pattern.len() + d).min(self.by_len.len().saturating_sub(1));
        (lo..=hi)
            .filter_map(|len| self.by_len.get(len))
            .flatten()
            .copied()
            .collect()
    }

    fn ordered(&self, mut ids: Vec<u32>) -> CandidateSet {
        ids.sort_by(|&a, &b| {
            let (a, b) = (a as usize, b as usize);
            self.freq[b]
                .cmp(&self.freq[a])
                .then_with(|| self.words[a].cmp(&self.words[b]))
        });
        CandidateSet::from_sorted(ids.into_iter().map(|id| self.words[id as usize].clone()).collect())
    }
}

/// All strings obtained from `word` by deleting at most `max` characters.
fn deletion_variants(word: &[u8], max: usize, out: &mut Vec<Vec<u8>>) {
    let positions: Vec<usize> = (0..word.len()).collect();
    for k in 0..=max.min(word.len()) {
        for_each_subset(&positions, k, &mut |subset| {
            out.push(
                word.iter()
                    .enumerate()
                    .filter(|(i, _)| !subset.contains(i))
                    .map(|(_, &b)| b)
                    .collect(),
            );
        });
    }
}

/// Calls `f` with every `k`-element subset of `items`, in lexicographic order.
fn for_each_subset(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    go(items, k, 0, &mut Vec::with_capacity(k), f);
}
