//! JSON-over-HTTP embedding client.
//!
//! Request `{"texts": [...]}`, response `{"vectors": [[...], ...]}`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{check_texts, EmbeddingError, EmbeddingProvider, EmbeddingVector, ProviderKind};

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub url: String,
    pub name: String,
    pub max_attempts: u32,
    pub backoff: Duration,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn new(url: impl Into<String>) -> Self {
        RemoteConfig {
            url: url.into(),
            name: "remote".into(),
            max_attempts: 3,
            backoff: Duration::from_millis(200),
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

enum Failure {
    Retry(String),
    Fatal(String),
    Protocol(String),
}

pub struct RemoteProvider {
    cfg: RemoteConfig,
    agent: ureq::Agent,
    dim: OnceLock<usize>,
    requests: AtomicUsize,
}

impl RemoteProvider {
    pub fn new(cfg: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteProvider {
            cfg,
            agent,
            dim: OnceLock::new(),
            requests: AtomicUsize::new(0),
        }
    }

    pub fn url(&self) -> &str {
        &self.cfg.url
    }

    /// HTTP requests sent so far, retries included.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    fn attempt(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, Failure> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let mut resp = self
            .agent
            .post(&self.cfg.url)
            .send_json(EmbedRequest { texts })
            .map_err(|e| Failure::Retry(e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(Failure::Retry(format!("HTTP {}", status)));
        }
        if status != 200 {
            return Err(Failure::Fatal(format!("HTTP {}", status)));
        }
        let body: EmbedResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| Failure::Protocol(e.to_string()))?;
        Ok(body.vectors)
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn name(&self) -> &str {
        &self.cfg.name
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::RemoteService
    }

    fn dimension(&self) -> Option<usize> {
        self.dim.get().copied()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        check_texts(texts)?;
        let max = self.cfg.max_attempts.max(1);
        let mut attempts = 0;
        let raw = loop {
            attempts += 1;
            match self.attempt(texts) {
                Ok(v) => break v,
                Err(Failure::Retry(message)) if attempts >= max => {
                    return Err(EmbeddingError::Transport {
                        message,
                        retryable: true,
                        attempts,
                    })
                }
                Err(Failure::Retry(message)) => {
                    log::warn!("embedding request failed ({}), retrying", message);
                    std::thread::sleep(self.cfg.backoff * 2u32.pow(attempts - 1));
                }
                Err(Failure::Fatal(message)) => {
                    return Err(EmbeddingError::Transport {
                        message,
                        retryable: false,
                        attempts,
                    })
                }
                Err(Failure::Protocol(message)) => return Err(EmbeddingError::Protocol(message)),
            }
        };
        if raw.len() != texts.len() {
            return Err(EmbeddingError::Protocol(format!(
                "sent {} texts, received {} vectors",
                texts.len(),
                raw.len()
            )));
        }
        let mut out = Vec::with_capacity(raw.len());
        for (t, values) in texts.iter().zip(raw) {
            let dim = *self.dim.get_or_init(|| values.len());
            if values.len() != dim {
                return Err(EmbeddingError::DimensionMismatch(dim, values.len()));
            }
            out.push(EmbeddingVector::new(values).map_err(|_| EmbeddingError::ZeroVector(t.clone()))?);
        }
        Ok(out)
    }
}
