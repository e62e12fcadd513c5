use crate::spellkit::{Pattern, SpellIndex};

use super::Filter;

/// Keeps the characters of `window` at the filter's one positions.
pub fn puncture(window: &str, filter: &Filter) -> String {
    assert!(filter.len() >= window.len(), "filter shorter than window");
    window
        .bytes()
        .enumerate()
        .filter(|&(i, _)| filter.keeps(i))
        .map(|(_, b)| char::from(b))
        .collect()
}

/// Output of puncturing one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuncturedWindow {
    pub kept: String,
    pub filter_index: usize,
    /// `false` for a final partial window sent whole.
    pub punctured: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuncturedText {
    pub windows: Vec<PuncturedWindow>,
    pub tail_unpunctured: bool,
}

impl PuncturedText {
    /// All kept characters, concatenated in window order.
    pub fn payload(&self) -> String {
        self.windows.iter().map(|w| w.kept.as_str()).collect()
    }

    pub fn filter_indices(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.filter_index).collect()
    }

    pub fn kept_len(&self) -> usize {
        self.windows.iter().map(|w| w.kept.len()).sum()
    }
}

/// `1/K` for `K` candidates within distance `d`, or 0 without candidates.
pub fn estimate_recovery_probability(pattern: &Pattern, index: &SpellIndex, d: usize) -> f64 {
    match index.candidates(pattern, d).len() {
        0 => 0.0,
        k => 1.0 / k as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Dictionary;
    use crate::ice::{FilterBank, KeepRatio};

    #[test]
    fn caramel_loses_its_first_a() {
        let f = Filter::from_kept(7, [0, 2, 3, 4, 5, 6]);
        assert_eq!(puncture("caramel", &f), "cramel");
    }

    #[test]
    fn all_ones_is_identity() {
        assert_eq!(puncture("summer cake", &Filter::all_ones(11)), "summer cake");
        assert_eq!(puncture("ab", &Filter::all_ones(40)), "ab");
    }

    #[test]
    fn full_window_keeps_popcount() {
        let bank = FilterBank::generate(0, 4, 40, KeepRatio::new(0.9).unwrap()).unwrap();
        let w = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMN";
        assert_eq!(puncture(w, bank.filter(2)).len(), 36);
    }

    #[test]
    fn recovery_probability() {
        let dict = Dictionary::from_words(["summer", "simmer", "sumer"]).unwrap();
        let idx = SpellIndex::new(&dict);
        let p = Pattern::new("summ*r").unwrap();
        assert_eq!(estimate_recovery_probability(&p, &idx, 1), 1.0);
        let none = Pattern::new("qqqq*").unwrap();
        assert_eq!(estimate_recovery_probability(&none, &idx, 1), 0.0);
        let k = idx.scan(&Pattern::new("s*mmer").unwrap(), 1).len();
        assert_eq!(k, 2);
        assert_eq!(estimate_recovery_probability(&Pattern::new("s*mmer").unwrap(), &idx, 1), 0.5);
    }
}
