//! Sentence embedding providers and cosine similarity.

mod cache;
mod hashing;
mod remote;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cache::{CacheReport, CachedFileProvider, CachingProvider, EmbeddingCache};
pub use hashing::HashingProvider;
pub use remote::{RemoteConfig, RemoteProvider};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum EmbeddingError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero or non-finite vector for text {0:?}")]
    ZeroVector(String),
    #[error("text {index} is empty")]
    EmptyText { index: usize },
    #[error("no cached embedding for {} text(s): {}", texts.len(), quoted(texts))]
    Miss { texts: Vec<String> },
    #[error("embedding service failed after {attempts} attempt(s): {message}")]
    Transport {
        message: String,
        retryable: bool,
        attempts: u32,
    },
    #[error("embedding service protocol error: {0}")]
    Protocol(String),
    #[error("{path}:{line}: corrupt cache record: {message}")]
    CorruptCache {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cache file {path}: {message}")]
    Io { path: String, message: String },
}

fn quoted(texts: &[String]) -> String {
    texts
        .iter()
        .map(|t| format!("{:?}", t))
        .collect::<Vec<_>>()
        .join(", ")
}

impl EmbeddingError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, EmbeddingError::Transport { retryable: true, .. })
    }
}

/// Named after the matching `--provider` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProviderKind {
    #[serde(rename = "remote")]
    RemoteService,
    #[serde(rename = "cache")]
    CachedFile,
    #[serde(rename = "test")]
    DeterministicTest,
}

impl ProviderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProviderKind::RemoteService => "remote",
            ProviderKind::CachedFile => "cache",
            ProviderKind::DeterministicTest => "test",
        }
    }
}

/// Embedding vector with its Euclidean norm; never zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    norm: f64,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbeddingError> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(EmbeddingError::ZeroVector(String::new()));
        }
        Ok(EmbeddingVector { values, norm })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Same direction, every component multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self, EmbeddingError> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }
}

pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch(a.dim(), b.dim()));
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((dot / (a.norm * b.norm)).clamp(-1.0, 1.0))
}

/// Source of sentence embeddings. Implementations must be callable from
/// several threads at once.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn kind(&self) -> ProviderKind;
    /// Known once the provider has produced a vector, or fixed up front.
    fn dimension(&self) -> Option<usize>;
    /// One vector per text, in input order.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for std::sync::Arc<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn kind(&self) -> ProviderKind {
        (**self).kind()
    }
    fn dimension(&self) -> Option<usize> {
        (**self).dimension()
    }
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        (**self).embed_batch(texts)
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn kind(&self) -> ProviderKind {
        (**self).kind()
    }
    fn dimension(&self) -> Option<usize> {
        (**self).dimension()
    }
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        (**self).embed_batch(texts)
    }
}

/// Collapse whitespace runs to single spaces and trim.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Hex SHA-256 of provider name and normalized text.
pub fn cache_key(provider: &str, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(provider.as_bytes());
    h.update(b"\n");
    h.update(normalize_text(text).as_bytes());
    hex::encode(h.finalize())
}

pub(crate) fn check_texts(texts: &[String]) -> Result<(), EmbeddingError> {
    match texts.iter().position(|t| t.trim().is_empty()) {
        Some(index) => Err(EmbeddingError::EmptyText { index }),
        None => Ok(()),
    }
}
