use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::MetricsError;

/// Sentence vectors returned by a provider.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Embeddings {
    pub vectors: Vec<Vec<f64>>,
    pub dim: usize,
    pub model_id: String,
}

impl Embeddings {
    fn check(&self, expected: usize) -> Result<(), MetricsError> {
        if self.vectors.len() != expected {
            return Err(MetricsError::BadEmbeddings(format!(
                "{} vectors for {expected} texts",
                self.vectors.len()
            )));
        }
        if let Some(v) = self.vectors.iter().find(|v| v.len() != self.dim) {
            return Err(MetricsError::BadEmbeddings(format!(
                "a vector of length {} with declared dim {}",
                v.len(),
                self.dim
            )));
        }
        Ok(())
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, texts: &[&str]) -> Result<Embeddings, MetricsError>;
}

/// Cosine similarity clamped to `[0, 1]`; 0 if either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

pub fn sentence_similarity(a: &str, b: &str, provider: &dyn EmbeddingProvider) -> Result<f64, MetricsError> {
    let e = provider.embed(&[a, b])?;
    e.check(2)?;
    Ok(cosine(&e.vectors[0], &e.vectors[1]))
}

/// Wraps a provider and rejects any reply whose dimension differs from the
/// first one seen.
pub struct CheckedProvider<P> {
    inner: P,
    dim: OnceLock<usize>,
}

impl<P: EmbeddingProvider> CheckedProvider<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            dim: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim.get().copied()
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for CheckedProvider<P> {
    fn embed(&self, texts: &[&str]) -> Result<Embeddings, MetricsError> {
        let e = self.inner.embed(texts)?;
        e.check(texts.len())?;
        let first = *self.dim.get_or_init(|| e.dim);
        if e.dim != first {
            return Err(MetricsError::BadEmbeddings(format!(
                "dimension changed from {first} to {}",
                e.dim
            )));
        }
        Ok(e)
    }
}

/// `POST {base}/embed` with `{"texts": [...]}`.
pub struct HttpEmbeddingProvider {
    url: String,
    agent: ureq::Agent,
}

impl HttpEmbeddingProvider {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        Self {
            url: format!("{}/embed", base_url.trim_end_matches('/')),
            agent: ureq::Agent::config_builder()
                .timeout_global(Some(timeout))
                .build()
                .into(),
        }
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn embed(&self, texts: &[&str]) -> Result<Embeddings, MetricsError> {
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(json!({ "texts": texts }))
            .map_err(|e| MetricsError::ProviderUnavailable(e.to_string()))?;
        let e: Embeddings = resp
            .body_mut()
            .read_json()
            .map_err(|e| MetricsError::BadEmbeddings(e.to_string()))?;
        e.check(texts.len())?;
        Ok(e)
    }
}

/// Deterministic offline provider: fixed vectors for known texts, otherwise
/// a hashed bag of character trigrams.
#[derive(Debug, Clone, Default)]
pub struct MockEmbeddingProvider {
    dim: usize,
    fixed: HashMap<String, Vec<f64>>,
}

impl MockEmbeddingProvider {
    pub fn new(dim: usize) -> Self {
        Self {
            dim: dim.max(1),
            fixed: HashMap::new(),
        }
    }

    /// Returns `vector` whenever `text` is embedded; its length must be `dim`.
    pub fn with_fixed(mut self, text: &str, vector: Vec<f64>) -> Self {
        assert_eq!(vector.len(), self.dim, "fixed vector has the wrong dimension");
        self.fixed.insert(text.to_string(), vector);
        self
    }

    fn hashed(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let padded: Vec<u8> = [b"  ", text.as_bytes(), b"  "].concat();
        for g in padded.windows(3) {
            let x = crate::seed::combine(&[u64::from(g[0]), u64::from(g[1]), u64::from(g[2])]);
            let sign = if x >> 63 == 0 { 1.0 } else { -1.0 };
            v[(x % self.dim as u64) as usize] += sign;
        }
        v
    }
}

impl EmbeddingProvider for MockEmbeddingProvider {
    fn embed(&self, texts: &[&str]) -> Result<Embeddings, MetricsError> {
        Ok(Embeddings {
            vectors: texts
                .iter()
                .map(|t| self.fixed.get(*t).cloned().unwrap_or_else(|| self.hashed(t)))
                .collect(),
            dim: self.dim,
            model_id: "mock-trigram".into(),
        })
    }
}
