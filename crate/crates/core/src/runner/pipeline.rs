use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Dictionary, Token, TokenizedText};
use crate::ice::{FilterBank, Ice, KeepRatio, ScoreParams, Scorer, Selection};
use crate::metrics::{CheckedProvider, EmbeddingProvider, EvalRecord, HttpEmbeddingProvider, MockEmbeddingProvider};
use crate::phy::{ChannelConfig, Frame, LdpcCode, Link, SymbolBudget};
use crate::recover::{
    indicate_frame, Backend, DictionaryRecoverer, IndicatedText, LlmRecoverer, RecoveredText, Recoverer, STAR,
};
use crate::spellkit::SpellIndex;

use super::{EmbedSource, RunConfig, RunnerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    /// Filter chosen by maximum kept score.
    Proposed,
    /// Filter drawn uniformly from the same bank.
    Random,
    /// Whole words replaced by a single `*`.
    Word,
    /// The lowest-scored characters replaced by `*`, as many as the word arm dropped.
    Character,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Proposed => "proposed",
            Arm::Random => "random",
            Arm::Word => "word",
            Arm::Character => "character",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The received frame could not be interpreted; scores are zero.
    FrameLost,
    /// A local error (bad input or configuration); excluded from means.
    Failed,
}

/// One point of the transmission grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionPoint {
    pub filters: usize,
    pub keep: KeepRatio,
    pub snr_db: f64,
    pub budget: SymbolBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub status: Status,
    pub eval: EvalRecord,
    pub recovered: String,
    /// Characters of the original text that were not sent.
    pub omitted: usize,
    /// Channel symbols used; `None` when there is no channel.
    pub symbols: Option<usize>,
    /// `symbols / l(t)`.
    pub symbols_per_character: Option<f64>,
    pub fallback: bool,
    pub error: Option<String>,
}

impl TrialResult {
    fn failed(e: impl ToString) -> Self {
        Self {
            status: Status::Failed,
            eval: EvalRecord::lost(),
            recovered: String::new(),
            omitted: 0,
            symbols: None,
            symbols_per_character: None,
            fallback: false,
            error: Some(e.to_string()),
        }
    }
}

/// Fixed parts of a pipeline that do not vary over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub scores: ScoreParams,
    pub window_len: usize,
    /// Seed of every filter bank; banks with fewer filters are prefixes of larger ones.
    pub bank_seed: u64,
    pub ldpc_iterations: usize,
    pub max_n: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            scores: ScoreParams::default(),
            window_len: 40,
            bank_seed: 0,
            ldpc_iterations: 50,
            max_n: 4,
        }
    }
}

/// Transmitter, channel, receiver and scoring for single sentences.
pub struct Pipeline {
    params: PipelineParams,
    scorer: Arc<Scorer>,
    link: Link,
    recoverer: Box<dyn Recoverer>,
    provider: Option<Box<dyn EmbeddingProvider>>,
    banks: Mutex<HashMap<(usize, KeepRatio), Arc<FilterBank>>>,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("params", &self.params)
            .field("backend", &self.recoverer.backend())
            .finish_non_exhaustive()
    }
}

impl Pipeline {
    pub fn new(
        params: PipelineParams,
        index: Arc<SpellIndex>,
        code: Arc<LdpcCode>,
        recoverer: Box<dyn Recoverer>,
        provider: Option<Box<dyn EmbeddingProvider>>,
    ) -> Self {
        Self {
            scorer: Arc::new(Scorer::new(index, params.scores)),
            link: Link::new(code, params.ldpc_iterations),
            params,
            recoverer,
            provider,
            banks: Mutex::new(HashMap::new()),
        }
    }

    /// Bundled dictionary and code with dictionary recovery and no similarity score.
    pub fn deterministic(params: PipelineParams) -> Self {
        let index = Arc::new(SpellIndex::new(&Dictionary::bundled()));
        let recoverer = Box::new(DictionaryRecoverer::new(Arc::clone(&index)));
        Self::new(params, index, Arc::new(LdpcCode::bundled()), recoverer, None)
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self, RunnerError> {
        let dict = match &cfg.dictionary {
            Some(p) => Dictionary::from_path(p).map_err(|e| RunnerError::Setup(format!("{}: {e}", p.display())))?,
            None => Dictionary::bundled(),
        };
        let index = Arc::new(SpellIndex::new(&dict));
        let code = match &cfg.ldpc {
            Some(p) => LdpcCode::from_path(p).map_err(|e| RunnerError::Setup(format!("{}: {e}", p.display())))?,
            None => LdpcCode::bundled(),
        };
        let dictionary = DictionaryRecoverer::new(Arc::clone(&index));
        let recoverer: Box<dyn Recoverer> = match cfg.backend {
            Backend::Deterministic => Box::new(dictionary),
            Backend::Llm => Box::new(LlmRecoverer::new(cfg.llm.clone(), dictionary)),
        };
        let provider: Option<Box<dyn EmbeddingProvider>> = match &cfg.embed {
            EmbedSource::None => None,
            EmbedSource::Mock => Some(Box::new(CheckedProvider::new(MockEmbeddingProvider::new(256)))),
            EmbedSource::Http(url) => Some(Box::new(CheckedProvider::new(HttpEmbeddingProvider::new(
                url,
                cfg.llm.timeout,
            )))),
        };
        let params = PipelineParams {
            scores: cfg.scores,
            window_len: cfg.window_len,
            bank_seed: cfg.seed,
            ldpc_iterations: cfg.ldpc_iterations,
            max_n: cfg.max_n,
        };
        Ok(Self::new(params, index, Arc::new(code), recoverer, provider))
    }

    pub fn params(&self) -> &PipelineParams {
        &self.params
    }

    pub fn scorer(&self) -> &Scorer {
        &self.scorer
    }

    pub fn link(&self) -> &Link {
        &self.link
    }

    pub fn recoverer(&self) -> &dyn Recoverer {
        self.recoverer.as_ref()
    }

    /// The shared bank for `m` filters at `keep`, generated once.
    pub fn bank(&self, m: usize, keep: KeepRatio) -> Result<Arc<FilterBank>, RunnerError> {
        let mut banks = self.banks.lock().expect("poisoned");
        if let Some(b) = banks.get(&(m, keep)) {
            return Ok(Arc::clone(b));
        }
        let bank = FilterBank::generate(self.params.bank_seed, m, self.params.window_len, keep)
            .map_err(|e| RunnerError::Setup(e.to_string()))?;
        let bank = Arc::new(bank);
        banks.insert((m, keep), Arc::clone(&bank));
        Ok(bank)
    }

    fn score(&self, reference: &str, recovered: RecoveredText, omitted: usize) -> TrialResult {
        match EvalRecord::score(reference, &recovered.text, self.params.max_n, self.provider.as_deref()) {
            Ok(eval) => TrialResult {
                status: Status::Ok,
                eval,
                recovered: recovered.text,
                omitted,
                symbols: None,
                symbols_per_character: None,
                fallback: recovered.fallback,
                error: None,
            },
            Err(e) => TrialResult::failed(e),
        }
    }

    /// Puncture, frame, encode, transmit, decode, indicate, recover and score.
    pub fn transmit(&self, sentence: &str, point: &TransmissionPoint, selection: Selection, noise_seed: u64) -> TrialResult {
        let text = match tokenize(sentence) {
            Ok(t) => t,
            Err(e) => return TrialResult::failed(e),
        };
        let bank = match self.bank(point.filters, point.keep) {
            Ok(b) => b,
            Err(e) => return TrialResult::failed(e),
        };
        let punctured = Ice::new(Arc::clone(&self.scorer), Arc::clone(&bank)).puncture_text(&text, selection);
        let omitted = text.len() - punctured.kept_len();
        let frame = Frame::from_punctured(&punctured, &bank);
        let bits = match frame.serialize() {
            Ok(b) => b,
            Err(e) => return TrialResult::failed(e),
        };
        let channel = ChannelConfig::new(point.snr_db, noise_seed);
        let out = match self.link.transmit(&bits, text.len(), point.budget, &channel) {
            Ok(o) => o,
            Err(e) => return TrialResult::failed(e),
        };
        let received = match point.budget {
            SymbolBudget::Natural => Frame::deserialize(&out.bits),
            SymbolBudget::PerCharacter(_) => Frame::deserialize_exact(&out.bits),
        };
        let spc = out.symbols as f64 / text.len().max(1) as f64;
        let indicated = received
            .map_err(|e| e.to_string())
            .and_then(|f| indicate_frame(&f, &bank).map_err(|e| e.to_string()));
        let mut result = match indicated {
            Ok(m) => self.score(sentence, self.recoverer.recover(&m), omitted),
            Err(e) => TrialResult {
                status: Status::FrameLost,
                eval: EvalRecord::lost(),
                recovered: String::new(),
                omitted,
                symbols: None,
                symbols_per_character: None,
                fallback: false,
                error: Some(e),
            },
        };
        result.symbols = Some(out.symbols);
        result.symbols_per_character = Some(spc);
        result
    }

    /// Removes `floor((1 - ratio) * L)` of the `L` words, chosen uniformly
    /// with `seed`, leaving one `*` per removed word, then recovers.
    pub fn word_omission(&self, sentence: &str, ratio: f64, seed: u64) -> TrialResult {
        match tokenize(sentence) {
            Ok(text) => {
                let m = omit_words(&text, ratio, seed);
                let omitted = text.len() + m.star_count() - m.as_str().len();
                self.score(sentence, self.recoverer.recover(&m), omitted)
            }
            Err(e) => TrialResult::failed(e),
        }
    }

    /// Replaces the `budget` lowest-scored characters with `*` and recovers.
    pub fn character_omission(&self, sentence: &str, budget: usize) -> TrialResult {
        match tokenize(sentence) {
            Ok(text) => {
                let m = omit_characters(&text, &self.scorer, budget);
                self.score(sentence, self.recoverer.recover(&m), m.star_count())
            }
            Err(e) => TrialResult::failed(e),
        }
    }
}

/// Word omission: `floor((1 - ratio) * L)` distinct words picked with a
/// ChaCha8 stream seeded by `seed`, each replaced by a single `*`.
pub fn omit_words(text: &TokenizedText, ratio: f64, seed: u64) -> IndicatedText {
    let words: Vec<(usize, usize)> = text
        .tokens()
        .iter()
        .filter_map(|t| match t {
            Token::Word { start, len, .. } => Some((*start, *len)),
            Token::NonWord { .. } => None,
        })
        .collect();
    let drop = (((1.0 - ratio) * words.len() as f64) + 1e-9).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, words.len(), drop.min(words.len())).into_vec();
    chosen.sort_unstable();
    let s = text.as_str();
    let mut out = String::with_capacity(s.len());
    let mut pos = 0;
    for w in chosen {
        let (start, len) = words[w];
        out.push_str(&s[pos..start]);
        out.push(STAR);
        pos = start + len;
    }
    out.push_str(&s[pos..]);
    IndicatedText::from_marked(&out)
}

/// Character omission over the whole text as one window: the `budget`
/// characters with the lowest scores, earlier positions first on ties.
pub fn omit_characters(text: &TokenizedText, scorer: &Scorer, budget: usize) -> IndicatedText {
    let scores = scorer.score_window(text, 0..text.len()).scores;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut bytes = text.as_str().as_bytes().to_vec();
    for &i in order.iter().take(budget) {
        bytes[i] = STAR as u8;
    }
    IndicatedText::from_marked(std::str::from_utf8(&bytes).expect("ascii"))
}
