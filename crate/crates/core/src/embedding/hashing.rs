use sha2::{Digest, Sha256};

use super::{check_texts, EmbeddingError, EmbeddingProvider, EmbeddingVector, ProviderKind};

/// Deterministic bag-of-tokens vectors for tests and offline runs.
///
/// Each lowercase alphanumeric token is hashed with SHA-256 and the first
/// byte picks a coordinate to increment. Counts never cancel, so any text
/// with a token gets a nonzero vector. The result carries no semantic
/// meaning beyond shared tokens.
#[derive(Debug, Clone)]
pub struct HashingProvider {
    name: String,
}

impl HashingProvider {
    pub const DIMENSION: usize = 64;

    pub fn new() -> Self {
        HashingProvider { name: "test".into() }
    }

    pub fn embed_one(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        let mut values = vec![0.0; Self::DIMENSION];
        let lower = text.to_lowercase();
        for token in lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            let h = Sha256::digest(token.as_bytes());
            values[h[0] as usize % Self::DIMENSION] += 1.0;
        }
        EmbeddingVector::new(values).map_err(|_| EmbeddingError::ZeroVector(text.to_string()))
    }
}

impl Default for HashingProvider {
    fn default() -> Self {
        Self::new()
    }
}

impl EmbeddingProvider for HashingProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::DeterministicTest
    }

    fn dimension(&self) -> Option<usize> {
        Some(Self::DIMENSION)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        check_texts(texts)?;
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}
