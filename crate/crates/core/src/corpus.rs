//! Text ingestion: the supported character set, word/non-word tokenization,
//! dictionaries with unigram counts, and corpus loaders.

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use log::warn;
use serde::Deserialize;
use thiserror::Error;

const BUNDLED_DICTIONARY: &str = include_str!("../assets/dictionary.txt");
const BUNDLED_CORPUS: &str = include_str!("../assets/corpus.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unsupported character U+{codepoint:04X} at index {index}")]
    UnsupportedCharacter { index: usize, codepoint: u32 },
    #[error("dictionary has no entries")]
    EmptyDictionary,
    #[error("malformed frequency line {line}: {content:?}")]
    BadFrequency { line: usize, content: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("invalid SQuAD json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Characters that can travel over the 7-bit source code: printable ASCII
/// and newline. `*` is excluded because the receiver uses it as the
/// missing-character marker.
pub fn is_supported(c: char) -> bool {
    c == '\n' || (matches!(c, ' '..='~') && c != '*')
}

/// Returns the first unsupported character, if any.
pub fn check_supported(text: &str) -> Result<(), CorpusError> {
    match text.chars().enumerate().find(|&(_, c)| !is_supported(c)) {
        Some((index, c)) => Err(CorpusError::UnsupportedCharacter {
            index,
            codepoint: c as u32,
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    /// A maximal run of ASCII letters.
    Word { start: usize, len: usize, text: String },
    /// A single space, digit, punctuation mark or newline.
    NonWord { index: usize, ch: char },
}

impl Token {
    pub fn start(&self) -> usize {
        match self {
            Token::Word { start, .. } => *start,
            Token::NonWord { index, .. } => *index,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Token::Word { len, .. } => *len,
            Token::NonWord { .. } => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_word(&self) -> bool {
        matches!(self, Token::Word { .. })
    }
}

/// A text split into words and single non-word characters.
///
/// Every character index belongs to exactly one token and concatenating the
/// tokens reproduces the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    text: String,
    tokens: Vec<Token>,
    token_index: Vec<usize>,
}

impl TokenizedText {
    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn char_at(&self, index: usize) -> char {
        self.text.as_bytes()[index] as char
    }

    /// The token covering character `index`.
    pub fn token_at(&self, index: usize) -> &Token {
        &self.tokens[self.token_index[index]]
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().filter_map(|t| match t {
            Token::Word { text, .. } => Some(text.as_str()),
            Token::NonWord { .. } => None,
        })
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    /// The word that ends immediately before `index`, if there is one.
    pub fn word_ending_before(&self, index: usize) -> Option<&str> {
        if index == 0 {
            return None;
        }
        match self.token_at(index - 1) {
            Token::Word { text, .. } => Some(text),
            Token::NonWord { .. } => None,
        }
    }
}

/// Splits `text` into maximal alphabetic runs and single non-word characters.
pub fn tokenize(text: &str) -> Result<TokenizedText, CorpusError> {
    check_supported(text)?;
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut token_index = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                i += 1;
            }
            token_index.extend(std::iter::repeat_n(tokens.len(), i - start));
            tokens.push(Token::Word {
                start,
                len: i - start,
                text: text[start..i].to_string(),
            });
        } else {
            token_index.push(tokens.len());
            tokens.push(Token::NonWord {
                index: i,
                ch: bytes[i] as char,
            });
            i += 1;
        }
    }
    Ok(TokenizedText {
        text: text.to_string(),
        tokens,
        token_index,
    })
}

/// Concatenates the tokens back into text.
pub fn detokenize(tokens: &TokenizedText) -> String {
    let mut out = String::with_capacity(tokens.len());
    for t in tokens.tokens() {
        match t {
            Token::Word { text, .. } => out.push_str(text),
            Token::NonWord { ch, .. } => out.push(*ch),
        }
    }
    out
}

/// A lowercase word list with unigram counts.
///
/// Matching is case-insensitive: lookups lowercase their argument. Words are
/// kept in lexicographic order so iteration is deterministic.
#[derive(Debug, Clone)]
pub struct Dictionary {
    words: Vec<String>,
    freq: HashMap<String, u64>,
}

impl Dictionary {
    /// Builds a dictionary from `(word, count)` pairs. Words are lowercased;
    /// duplicates keep the largest count.
    pub fn from_counts<I, S>(entries: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut freq: HashMap<String, u64> = HashMap::new();
        for (w, c) in entries {
            let w = w.as_ref().trim().to_ascii_lowercase();
            if w.is_empty() {
                continue;
            }
            let slot = freq.entry(w).or_insert(c);
            *slot = (*slot).max(c);
        }
        if freq.is_empty() {
            return Err(CorpusError::EmptyDictionary);
        }
        let mut words: Vec<String> = freq.keys().cloned().collect();
        words.sort();
        Ok(Self { words, freq })
    }

    /// Builds a dictionary where every word has count 1.
    pub fn from_words<I, S>(words: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::from_counts(words.into_iter().map(|w| (w, 1)))
    }

    /// The ~10k-word frequency-ranked English dictionary shipped with the crate.
    pub fn bundled() -> Self {
        load_dictionary(BUNDLED_DICTIONARY.as_bytes(), None::<&[u8]>)
            .expect("bundled dictionary parses")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let f = fs::File::open(path)?;
        load_dictionary(BufReader::new(f), None::<&[u8]>)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        if word.bytes().any(|b| b.is_ascii_uppercase()) {
            self.freq.contains_key(&word.to_ascii_lowercase())
        } else {
            self.freq.contains_key(word)
        }
    }

    /// Unigram count, 0 for words outside the dictionary.
    pub fn freq(&self, word: &str) -> u64 {
        if word.bytes().any(|b| b.is_ascii_uppercase()) {
            self.freq
                .get(&word.to_ascii_lowercase())
                .copied()
                .unwrap_or(0)
        } else {
            self.freq.get(word).copied().unwrap_or(0)
        }
    }

    /// Words in lexicographic order.
    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Parses a word list (`word` or `word count` per line) and an optional
/// frequency source (`word count` per line). Missing counts default to 1.
pub fn load_dictionary<R, F>(list: R, frequencies: Option<F>) -> Result<Dictionary, CorpusError>
where
    R: BufRead,
    F: BufRead,
{
    let mut counts: Vec<(String, u64)> = Vec::new();
    for (n, line) in list.lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let count = match parts.next() {
            Some(c) => c.parse::<u64>().map_err(|_| CorpusError::BadFrequency {
                line: n + 1,
                content: line.clone(),
            })?,
            None => 1,
        };
        counts.push((word.to_string(), count));
    }
    if let Some(freqs) = frequencies {
        let mut table = HashMap::new();
        for (n, line) in freqs.lines().enumerate() {
            let line = line?;
            let mut parts = line.split_whitespace();
            let (Some(word), Some(count)) = (parts.next(), parts.next()) else {
                continue;
            };
            let count = count.parse::<u64>().map_err(|_| CorpusError::BadFrequency {
                line: n + 1,
                content: line.clone(),
            })?;
            table.insert(word.to_ascii_lowercase(), count);
        }
        for (w, c) in counts.iter_mut() {
            if let Some(&f) = table.get(&w.to_ascii_lowercase()) {
                *c = f;
            }
        }
    }
    Dictionary::from_counts(counts)
}

/// Sentences read from a corpus file, with the number of rejected lines.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub sentences: Vec<String>,
    pub skipped: usize,
}

impl Corpus {
    /// The 500-sentence sample corpus shipped with the crate.
    pub fn bundled() -> Self {
        load_corpus(BUNDLED_CORPUS.as_bytes()).expect("bundled corpus parses")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e == "json") {
            load_squad(fs::File::open(path)?)
        } else {
            load_corpus(BufReader::new(fs::File::open(path)?))
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// One sentence per line. Blank lines are ignored; lines with characters
/// outside the 7-bit set are skipped with a warning.
pub fn load_corpus<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        push_sentence(&mut corpus, line, n + 1);
    }
    Ok(corpus)
}

fn push_sentence(corpus: &mut Corpus, sentence: &str, line: usize) {
    match check_supported(sentence) {
        Ok(()) => corpus.sentences.push(sentence.to_string()),
        Err(e) => {
            warn!("skipping corpus line {line}: {e}");
            corpus.skipped += 1;
        }
    }
}

#[derive(Deserialize)]
struct Squad {
    data: Vec<SquadArticle>,
}

#[derive(Deserialize)]
struct SquadArticle {
    paragraphs: Vec<SquadParagraph>,
}

#[derive(Deserialize)]
struct SquadParagraph {
    context: String,
}

/// Reads `data[].paragraphs[].context` and splits each context into sentences.
pub fn load_squad<R: Read>(reader: R) -> Result<Corpus, CorpusError> {
    let squad: Squad = serde_json::from_reader(reader)?;
    let mut corpus = Corpus::default();
    let mut n = 0;
    for article in &squad.data {
        for para in &article.paragraphs {
            for sentence in split_sentences(&para.context) {
                n += 1;
                push_sentence(&mut corpus, sentence, n);
            }
        }
    }
    Ok(corpus)
}

/// Splits on `.`, `!` or `?` followed by whitespace.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut start = 0;
    for i in 0..bytes.len() {
        let end_mark = matches!(bytes[i], b'.' | b'!' | b'?');
        let boundary = i + 1 == bytes.len() || bytes[i + 1].is_ascii_whitespace();
        if end_mark && boundary {
            let s = text[start..=i].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = i + 1;
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds(t: &TokenizedText) -> Vec<String> {
        t.tokens()
            .iter()
            .map(|t| match t {
                Token::Word { text, .. } => format!("W:{text}"),
                Token::NonWord { ch, .. } => format!("N:{ch}"),
            })
            .collect()
    }

    #[test]
    fn tokenizes_caramel_sentence() {
        let t = tokenize("I ate caramel.").unwrap();
        assert_eq!(
            kinds(&t),
            ["W:I", "N: ", "W:ate", "N: ", "W:caramel", "N:."]
        );
    }

    #[test]
    fn empty_and_digits() {
        assert!(tokenize("").unwrap().tokens().is_empty());
        assert_eq!(kinds(&tokenize("a1b").unwrap()), ["W:a", "N:1", "W:b"]);
    }

    #[test]
    fn apostrophe_splits_words() {
        assert_eq!(
            kinds(&tokenize("don't").unwrap()),
            ["W:don", "N:'", "W:t"]
        );
    }

    #[test]
    fn rejects_out_of_set_characters() {
        match tokenize("caf\u{e9}") {
            Err(CorpusError::UnsupportedCharacter { index, codepoint }) => {
                assert_eq!(index, 3);
                assert_eq!(codepoint, 0xE9);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(tokenize("a*b").is_err());
        assert!(tokenize("tab\there").is_err());
        assert!(tokenize("two\nlines").is_ok());
    }

    #[test]
    fn word_lookup_helpers() {
        let t = tokenize("big cat.").unwrap();
        assert_eq!(t.word_ending_before(3), Some("big"));
        assert_eq!(t.word_ending_before(0), None);
        assert_eq!(t.word_ending_before(4), None);
        assert_eq!(t.word_ending_before(7), Some("cat"));
        assert_eq!(t.word_count(), 2);
    }

    #[test]
    fn dictionary_from_list() {
        let d = load_dictionary("summer\nsimmer\n".as_bytes(), None::<&[u8]>).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.freq("summer"), 1);
        assert_eq!(d.freq("simmer"), 1);

        let d = load_dictionary("cat\ncat\n".as_bytes(), None::<&[u8]>).unwrap();
        assert_eq!(d.len(), 1);

        let d = load_dictionary("the\nof\n".as_bytes(), Some("the 1000\n".as_bytes())).unwrap();
        assert_eq!(d.freq("the"), 1000);
        assert_eq!(d.freq("of"), 1);
        assert_eq!(d.freq("THE"), 1000);
        assert!(d.contains("The"));
    }

    #[test]
    fn empty_dictionary_is_an_error() {
        assert!(matches!(
            load_dictionary("\n\n".as_bytes(), None::<&[u8]>),
            Err(CorpusError::EmptyDictionary)
        ));
    }

    #[test]
    fn bundled_assets_load() {
        let d = Dictionary::bundled();
        assert!(d.len() > 9_000);
        for w in ["summer", "simmer", "caramel", "cake", "the"] {
            assert!(d.contains(w), "{w}");
        }
        assert!(d.freq("the") > d.freq("summer"));
        let c = Corpus::bundled();
        assert_eq!(c.len(), 500);
        assert_eq!(c.skipped, 0);
        for s in &c.sentences {
            assert!(s.split_whitespace().count() >= 20);
        }
    }

    #[test]
    fn corpus_skips_bad_lines() {
        let c = load_corpus("good line\nbad \u{2014} line\n\nanother\n".as_bytes()).unwrap();
        assert_eq!(c.sentences, ["good line", "another"]);
        assert_eq!(c.skipped, 1);
    }

    #[test]
    fn squad_contexts_split_into_sentences() {
        let json = r#"{"data":[{"title":"x","paragraphs":[
            {"context":"First one. Second one? Third!","qas":[]},
            {"context":"Only one","qas":[]}]}]}"#;
        let c = load_squad(json.as_bytes()).unwrap();
        assert_eq!(c.sentences, ["First one.", "Second one?", "Third!", "Only one"]);
    }

    fn printable() -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![
                (b' '..=b'~').prop_filter("no star", |b| *b != b'*'),
                Just(b'\n')
            ],
            0..80,
        )
        .prop_map(|v| String::from_utf8(v).unwrap())
    }

    proptest! {
        #[test]
        fn detokenize_round_trips(s in printable()) {
            let t = tokenize(&s).unwrap();
            prop_assert_eq!(detokenize(&t), s.clone());
            let again = tokenize(&detokenize(&t)).unwrap();
            prop_assert_eq!(again, t.clone());
            let mut covered = 0;
            for (i, tok) in t.tokens().iter().enumerate() {
                prop_assert_eq!(tok.start(), covered);
                covered += tok.len();
                if let Token::Word { text, .. } = tok {
                    prop_assert!(text.bytes().all(|b| b.is_ascii_alphabetic()));
                }
                for j in tok.start()..tok.start() + tok.len() {
                    prop_assert_eq!(t.token_at(j), &t.tokens()[i]);
                }
            }
            prop_assert_eq!(covered, s.len());
        }
    }
}
