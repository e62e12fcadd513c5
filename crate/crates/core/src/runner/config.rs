use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use crate::ice::{KeepRatio, ScoreParams};
use crate::phy::SymbolBudget;
use crate::recover::{Backend, LlmConfig, LlmFlavor};

use super::RunnerError;

/// Which grid the sweep walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Puncture, frame, transmit and recover; proposed and random-selection arms.
    Transmission,
    /// No channel: random word omission against matched character omission.
    Omission,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Transmission => "transmission",
            Experiment::Omission => "omission",
        }
    }
}

/// Source of sentence embeddings for the similarity score.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbedSource {
    None,
    /// Offline hashed-trigram vectors.
    Mock,
    Http(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` uses the bundled corpus.
    pub corpus: Option<PathBuf>,
    /// `None` uses the bundled dictionary.
    pub dictionary: Option<PathBuf>,
    /// Use at most this many sentences of the corpus.
    pub sentences: Option<usize>,
    pub scores: ScoreParams,
    pub window_len: usize,
    pub filters: Vec<usize>,
    pub keep_ratio: Vec<f64>,
    /// `f64::INFINITY` is a noiseless channel.
    pub snr_db: Vec<f64>,
    pub budget: Vec<SymbolBudget>,
    pub word_ratio: Vec<f64>,
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: usize,
    pub ldpc_iterations: usize,
    /// `None` uses the bundled (648, 324) code.
    pub ldpc: Option<PathBuf>,
    pub max_n: usize,
    pub backend: Backend,
    pub llm: LlmConfig,
    pub embed: EmbedSource,
    pub threads: usize,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut llm = LlmConfig::default();
        if let Ok(url) = std::env::var("PUNCTEXT_LLM_URL") {
            llm.base_url = url;
        }
        let embed = match std::env::var("PUNCTEXT_EMBED_URL") {
            Ok(url) => EmbedSource::Http(url),
            Err(_) => EmbedSource::None,
        };
        Self {
            corpus: None,
            dictionary: None,
            sentences: None,
            scores: ScoreParams::default(),
            window_len: 40,
            filters: vec![64],
            keep_ratio: vec![0.9],
            snr_db: vec![f64::INFINITY],
            budget: vec![SymbolBudget::Natural],
            word_ratio: vec![0.9],
            experiment: Experiment::Transmission,
            seed: 0,
            trials: 500,
            ldpc_iterations: 50,
            ldpc: None,
            max_n: 4,
            backend: Backend::Deterministic,
            llm,
            embed,
            threads: 0,
            output: PathBuf::from("results.jsonl"),
        }
    }
}

fn bad(key: &str, value: &str, why: impl fmt::Display) -> RunnerError {
    RunnerError::Config(format!("{key} = {value}: {why}"))
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T, RunnerError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e| bad(key, value, e))
}

fn list<T, F>(key: &str, value: &str, item: F) -> Result<Vec<T>, RunnerError>
where
    F: Fn(&str) -> Result<T, RunnerError>,
{
    let v = value.trim();
    let v = v.strip_prefix('[').and_then(|v| v.strip_suffix(']')).unwrap_or(v);
    let items = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err(bad(key, value, "empty list"));
    }
    Ok(items)
}

fn snr(key: &str, s: &str) -> Result<f64, RunnerError> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "none" => Ok(f64::INFINITY),
        _ => {
            let v: f64 = scalar(key, s)?;
            if v.is_nan() {
                return Err(bad(key, s, "not a number"));
            }
            Ok(v)
        }
    }
}

fn budget(key: &str, s: &str) -> Result<SymbolBudget, RunnerError> {
    if s.eq_ignore_ascii_case("natural") {
        return Ok(SymbolBudget::Natural);
    }
    let b = SymbolBudget::PerCharacter(scalar(key, s)?);
    b.validate().map_err(|e| bad(key, s, e))?;
    Ok(b)
}

fn path(value: &str) -> Option<PathBuf> {
    match value.trim() {
        "" | "bundled" => None,
        p => Some(PathBuf::from(p)),
    }
}

impl RunConfig {
    /// Parses `key = value` lines over the defaults. `#` starts a comment;
    /// lists are comma separated, optionally in brackets.
    pub fn parse(text: &str) -> Result<Self, RunnerError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| RunnerError::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, RunnerError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key; used for config lines and command-line overrides alike.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), RunnerError> {
        match key {
            "corpus" => self.corpus = path(value),
            "dictionary" => self.dictionary = path(value),
            "sentences" => {
                self.sentences = match value {
                    "all" => None,
                    v => Some(scalar(key, v)?),
                }
            }
            "alpha" => self.scores.alpha = scalar(key, value)?,
            "beta" => self.scores.beta = scalar(key, value)?,
            "gamma" => self.scores.gamma = scalar(key, value)?,
            "delta" => self.scores.delta = scalar(key, value)?,
            "window_len" => self.window_len = scalar(key, value)?,
            "filters" => self.filters = list(key, value, |s| scalar(key, s))?,
            "keep_ratio" => self.keep_ratio = list(key, value, |s| scalar(key, s))?,
            "snr_db" => self.snr_db = list(key, value, |s| snr(key, s))?,
            "symbols_per_char" => self.budget = list(key, value, |s| budget(key, s))?,
            "word_ratio" => self.word_ratio = list(key, value, |s| scalar(key, s))?,
            "experiment" => {
                self.experiment = match value {
                    "transmission" => Experiment::Transmission,
                    "omission" => Experiment::Omission,
                    _ => return Err(bad(key, value, "expected transmission or omission")),
                }
            }
            "seed" => self.seed = scalar(key, value)?,
            "trials" => self.trials = scalar(key, value)?,
            "ldpc_iterations" => self.ldpc_iterations = scalar(key, value)?,
            "ldpc" => self.ldpc = path(value),
            "max_n" => self.max_n = scalar(key, value)?,
            "backend" => {
                self.backend = match value {
                    "deterministic" => Backend::Deterministic,
                    "llm" => Backend::Llm,
                    _ => return Err(bad(key, value, "expected deterministic or llm")),
                }
            }
            "llm_url" => self.llm.base_url = value.to_string(),
            "llm_model" => self.llm.model = value.to_string(),
            "llm_flavor" => {
                self.llm.flavor = match value {
                    "chat" => LlmFlavor::Chat,
                    "sidecar" => LlmFlavor::Sidecar,
                    _ => return Err(bad(key, value, "expected chat or sidecar")),
                }
            }
            "llm_token_env" => self.llm.token_env = value.to_string(),
            "llm_retries" => self.llm.retries = scalar(key, value)?,
            "llm_timeout_s" => self.llm.timeout = Duration::from_secs_f64(scalar(key, value)?),
            "llm_concurrency" => self.llm.max_concurrency = scalar(key, value)?,
            "embed" => {
                self.embed = match value {
                    "" | "none" => EmbedSource::None,
                    "mock" => EmbedSource::Mock,
                    url => EmbedSource::Http(url.to_string()),
                }
            }
            "threads" => self.threads = scalar(key, value)?,
            "output" => self.output = PathBuf::from(value),
            _ => return Err(RunnerError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` overrides, then validates.
    pub fn with_overrides<'a>(mut self, overrides: impl IntoIterator<Item = &'a str>) -> Result<Self, RunnerError> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| RunnerError::Config(format!("override {o:?} is not key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        self.scores.validate().map_err(|e| RunnerError::Config(e.to_string()))?;
        let fail = |m: &str| Err(RunnerError::Config(m.to_string()));
        if self.window_len == 0 {
            return fail("window_len must be at least 1");
        }
        if self.filters.is_empty() || self.filters.contains(&0) {
            return fail("filters must be a non-empty list of counts >= 1");
        }
        for &r in self.keep_ratio.iter().chain(&self.word_ratio) {
            if !(r > 0.0 && r <= 1.0) {
                return fail("keep_ratio and word_ratio values must lie in (0, 1]");
            }
        }
        for &r in &self.keep_ratio {
            KeepRatio::new(r).map_err(|e| RunnerError::Config(e.to_string()))?;
        }
        if self.keep_ratio.is_empty() || self.snr_db.is_empty() || self.budget.is_empty() || self.word_ratio.is_empty() {
            return fail("sweep lists must be non-empty");
        }
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.max_n == 0 {
            return fail("max_n must be at least 1");
        }
        if self.sentences == Some(0) {
            return fail("sentences must be at least 1");
        }
        Ok(())
    }

    /// Where the aggregate table goes: the results path with a `.csv` extension.
    pub fn aggregate_path(&self) -> PathBuf {
        self.output.with_extension("csv")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_comments() {
        let cfg = RunConfig::parse(
            "# sweep\n\
             keep_ratio = [0.8, 0.9]\n\
             snr_db = 0, 10, inf   # dB\n\
             filters = 4,16,64\n\
             symbols_per_char = natural, 9.5\n\
             trials = 10\n\
             backend = deterministic\n",
        )
        .unwrap();
        assert_eq!(cfg.keep_ratio, vec![0.8, 0.9]);
        assert_eq!(cfg.snr_db[..2], [0.0, 10.0]);
        assert!(cfg.snr_db[2].is_infinite());
        assert_eq!(cfg.filters, vec![4, 16, 64]);
        assert_eq!(cfg.budget, vec![SymbolBudget::Natural, SymbolBudget::PerCharacter(9.5)]);
        assert_eq!(cfg.trials, 10);
    }

    #[test]
    fn overrides_win() {
        let cfg = RunConfig::parse("seed = 1\ntrials = 3\n")
            .unwrap()
            .with_overrides(["seed=7", "keep_ratio = 1"])
            .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.keep_ratio, vec![1.0]);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "keep_ratio = 0",
            "keep_ratio = 1.5",
            "filters = 0",
            "filters = []",
            "window_len = 0",
            "alpha = 0.5",
            "trials = 0",
            "snr_db = nan",
            "symbols_per_char = -1",
            "colour = red",
            "no equals sign",
            "experiment = fig4",
        ] {
            assert!(RunConfig::parse(text).is_err(), "{text}");
        }
    }
}
