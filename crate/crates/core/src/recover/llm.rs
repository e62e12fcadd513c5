use std::time::Duration;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::corpus::is_supported;

use super::{Backend, DictionaryRecoverer, IndicatedText, RecoverError, RecoveredText, Recoverer, Resolution, STAR};

pub const PROMPT_VERSION: &str = "v1";

pub const PROMPT_SYSTEM_V1: &str = "You restore text. Replace every '*' with the missing character or characters \
(a '*' may also hide a space splitting two words). Return only the restored text, nothing else.";

/// Wire protocol of the recovery endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlmFlavor {
    /// `POST {base}/chat/completions`, OpenAI-style.
    Chat,
    /// `POST {base}/recover` with `{indicated, prompt_version}`.
    Sidecar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    pub flavor: LlmFlavor,
    /// Environment variable holding the bearer token, if any.
    pub token_env: String,
    /// Extra attempts after the first.
    pub retries: usize,
    pub backoff: Duration,
    pub timeout: Duration,
    pub max_concurrency: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000".into(),
            model: "gpt-3.5-turbo".into(),
            flavor: LlmFlavor::Chat,
            token_env: "PUNCTEXT_LLM_TOKEN".into(),
            retries: 2,
            backoff: Duration::from_millis(200),
            timeout: Duration::from_secs(60),
            max_concurrency: 4,
        }
    }
}

/// Recovery through a language-model endpoint, falling back to the
/// dictionary when the endpoint fails or keeps returning unusable text.
pub struct LlmRecoverer {
    cfg: LlmConfig,
    agent: ureq::Agent,
    fallback: DictionaryRecoverer,
    pool: rayon::ThreadPool,
}

impl std::fmt::Debug for LlmRecoverer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmRecoverer").field("cfg", &self.cfg).finish_non_exhaustive()
    }
}

impl LlmRecoverer {
    pub fn new(cfg: LlmConfig, fallback: DictionaryRecoverer) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .build()
            .into();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.max_concurrency.max(1))
            .build()
            .expect("thread pool");
        Self {
            cfg,
            agent,
            fallback,
            pool,
        }
    }

    pub fn config(&self) -> &LlmConfig {
        &self.cfg
    }

    /// One request, no retries.
    pub fn request(&self, indicated: &str) -> Result<String, RecoverError> {
        let base = self.cfg.base_url.trim_end_matches('/');
        let (url, body) = match self.cfg.flavor {
            LlmFlavor::Chat => (
                format!("{base}/chat/completions"),
                json!({
                    "model": self.cfg.model,
                    "temperature": 0,
                    "messages": [
                        {"role": "system", "content": PROMPT_SYSTEM_V1},
                        {"role": "user", "content": indicated},
                    ],
                }),
            ),
            LlmFlavor::Sidecar => (
                format!("{base}/recover"),
                json!({"indicated": indicated, "prompt_version": PROMPT_VERSION}),
            ),
        };
        let mut req = self.agent.post(&url);
        if let Ok(token) = std::env::var(&self.cfg.token_env) {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| RecoverError::EndpointUnavailable(e.to_string()))?;
        let v: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| RecoverError::MalformedReply(e.to_string()))?;
        let text = match self.cfg.flavor {
            LlmFlavor::Chat => v.pointer("/choices/0/message/content"),
            LlmFlavor::Sidecar => v.get("restored"),
        };
        text.and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| RecoverError::MalformedReply(format!("no text in {v}")))
    }

    /// Requests with retries and exponential backoff; the reply is validated
    /// and projected onto `m`.
    pub fn try_recover(&self, m: &IndicatedText) -> Result<RecoveredText, RecoverError> {
        let mut last = RecoverError::EndpointUnavailable("no attempt made".into());
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                std::thread::sleep(self.cfg.backoff * (1 << (attempt - 1).min(16)));
            }
            let reply = self
                .request(m.as_str())
                .and_then(|r| validate_reply(m.as_str(), &r).map(|r| r.to_string()));
            match reply {
                Ok(r) => return Ok(project_reply(m, &r)),
                Err(e) => {
                    log::debug!("recovery attempt {} failed: {e}", attempt + 1);
                    last = e;
                }
            }
        }
        Err(last)
    }

    /// Recovers many texts with at most `max_concurrency` requests in flight;
    /// output order follows input order.
    pub fn recover_all(&self, ms: &[IndicatedText]) -> Vec<RecoveredText> {
        self.pool.install(|| ms.par_iter().map(|m| self.recover(m)).collect())
    }
}

impl Recoverer for LlmRecoverer {
    fn recover(&self, m: &IndicatedText) -> RecoveredText {
        match self.try_recover(m) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("falling back to dictionary recovery: {e}");
                let mut r = self.fallback.recover(m);
                r.fallback = true;
                r
            }
        }
    }

    fn backend(&self) -> Backend {
        Backend::Llm
    }
}

/// Checks a reply against the indicated text and returns it with surrounding
/// whitespace trimmed to match `m`.
pub fn validate_reply<'a>(m: &str, reply: &'a str) -> Result<&'a str, RecoverError> {
    let mut r = reply;
    if !m.starts_with(char::is_whitespace) {
        r = r.trim_start();
    }
    if !m.ends_with(char::is_whitespace) {
        r = r.trim_end();
    }
    if !m.contains(STAR) {
        return if r == m {
            Ok(r)
        } else {
            Err(RecoverError::MalformedReply("text without markers must come back unchanged".into()))
        };
    }
    if r.contains(STAR) {
        return Err(RecoverError::MalformedReply("reply still holds '*'".into()));
    }
    if let Some(c) = r.chars().find(|&c| !is_supported(c)) {
        return Err(RecoverError::MalformedReply(format!("unsupported character {c:?}")));
    }
    let diff = r.len().abs_diff(m.len()) as f64;
    if diff > 0.1 * m.len() as f64 {
        return Err(RecoverError::MalformedReply(format!(
            "length {} too far from {}",
            r.len(),
            m.len()
        )));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Match,
    Sub,
    Star(usize),
    Drop,
    Keep,
}

const STAR_FILLS: [(usize, u32); 4] = [(1, 0), (0, 1), (2, 1), (3, 2)];

/// Fits `reply` onto `m`: every non-star character of `m` is kept and each
/// star takes the reply text aligned with it (zero to three characters),
/// chosen by a minimum-cost alignment. Other differences in the reply are
/// discarded.
pub fn project_reply(m: &IndicatedText, reply: &str) -> RecoveredText {
    let a = m.as_str().as_bytes();
    let b = reply.as_bytes();
    let (la, lb) = (a.len(), b.len());
    let inf = u32::MAX / 2;
    let mut cost = vec![vec![inf; lb + 1]; la + 1];
    for j in (0..=lb).rev() {
        cost[la][j] = 2 * (lb - j) as u32;
    }
    let options = |i: usize, j: usize, cost: &Vec<Vec<u32>>| {
        let mut out: Vec<(u32, Step)> = Vec::with_capacity(7);
        if i < la && a[i] != STAR as u8 && j < lb && a[i] == b[j] {
            out.push((cost[i + 1][j + 1], Step::Match));
        }
        if i < la && a[i] != STAR as u8 && j < lb && a[i] != b[j] {
            out.push((1 + cost[i + 1][j + 1], Step::Sub));
        }
        if i < la && a[i] == STAR as u8 {
            for (len, c) in STAR_FILLS {
                if j + len <= lb {
                    out.push((c + cost[i + 1][j + len], Step::Star(len)));
                }
            }
        }
        if j < lb {
            out.push((2 + cost[i][j + 1], Step::Drop));
        }
        if i < la && a[i] != STAR as u8 {
            out.push((2 + cost[i + 1][j], Step::Keep));
        }
        out
    };
    for i in (0..la).rev() {
        for j in (0..=lb).rev() {
            cost[i][j] = options(i, j, &cost).iter().map(|o| o.0).min().unwrap_or(inf);
        }
    }
    let mut resolutions = Vec::with_capacity(m.star_count());
    let (mut i, mut j) = (0, 0);
    while i < la {
        let target = cost[i][j];
        let step = options(i, j, &cost)
            .into_iter()
            .find(|o| o.0 == target)
            .map(|o| o.1)
            .expect("some step reaches the optimum");
        match step {
            Step::Match | Step::Sub => {
                i += 1;
                j += 1;
            }
            Step::Star(len) => {
                resolutions.push(Resolution {
                    position: i,
                    resolved: reply[j..j + len].to_string(),
                    backend: Backend::Llm,
                    candidates: None,
                });
                i += 1;
                j += len;
            }
            Step::Drop => j += 1,
            Step::Keep => i += 1,
        }
    }
    RecoveredText::assemble(m, resolutions, Backend::Llm)
}
