//! JSON-over-HTTP API: `POST /assess`, `POST /classify-verb`, `GET /health`.
//!
//! Responses are canonical JSON (sorted keys, at most six decimals). The
//! taxonomy loads in the background; until it is in place the two POST
//! routes and `/health` answer 503.

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use tca_core::aggregation::{AggregationError, AssessmentConfig};
use tca_core::bloom::{BloomClassifier, BloomClusterSet, BloomError};
use tca_core::canonical::to_canonical_json;
use tca_core::course::{Course, CourseError, Role};
use tca_core::embedding::{EmbeddingError, EmbeddingProvider};
use tca_core::pipeline::{Assessor, Pass, PipelineError};
use tca_core::semantic::SemanticError;
use tca_core::wordnet::VerbTaxonomy;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

/// Error body: `{"error": {kind, message, field?, retryable?, pass?}}`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub message: String,
    pub field: Option<String>,
    pub retryable: Option<bool>,
    pub pass: Option<Pass>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    kind: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    retryable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<Pass>,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            kind,
            message: message.into(),
            field: None,
            retryable: None,
            pass: None,
        }
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed", message)
    }

    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError {
            field: Some(field.into()),
            ..Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message)
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    fn in_pass(mut self, pass: Pass) -> Self {
        self.pass = Some(pass);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({
            "error": ErrorDetail {
                kind: self.kind,
                message: &self.message,
                field: self.field.as_deref(),
                retryable: self.retryable,
                pass: self.pass,
            }
        });
        canonical(self.status, &body)
    }
}

fn side_prefix(side: Role) -> &'static str {
    match side {
        Role::Receiving => "receiving",
        Role::Sending => "sending",
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let pass = e.pass();
        let msg = e.to_string();
        let err = match e {
            PipelineError::Input(CourseError::Invalid { path, message }) => ApiError::invalid(path, message),
            PipelineError::Input(CourseError::Io { .. }) => ApiError::internal(msg),
            PipelineError::Bloom(BloomError::Config(_) | BloomError::Io { .. }) | PipelineError::TaxonomicGrid(_) => {
                ApiError::internal(msg)
            }
            PipelineError::Bloom(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", msg),
            PipelineError::Semantic(SemanticError::Provider { side, source }) => match source {
                EmbeddingError::EmptyText { index } => {
                    ApiError::invalid(format!("{}.learning_outcomes[{}].text", side_prefix(side), index), msg)
                }
                EmbeddingError::ZeroVector(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", msg),
                other => ApiError {
                    retryable: Some(other.is_retryable()),
                    ..ApiError::new(StatusCode::BAD_GATEWAY, "provider", msg)
                },
            },
            PipelineError::Semantic(SemanticError::Contract(source)) => ApiError {
                retryable: Some(false),
                ..ApiError::new(StatusCode::BAD_GATEWAY, "provider", source.to_string())
            },
            PipelineError::Semantic(SemanticError::Grid(_)) => ApiError::internal(msg),
            PipelineError::Aggregation(AggregationError::Config { field, message }) => {
                ApiError::invalid(format!("config.{}", field), message)
            }
            PipelineError::Aggregation(_) => ApiError::internal(msg),
        };
        err.in_pass(pass)
    }
}

fn canonical<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match to_canonical_json(body) {
        Ok(text) => {
            let mut r = (status, text).into_response();
            r.headers_mut()
                .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
            r
        }
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

/// Shared, read-only service state. Cloning is cheap.
#[derive(Clone)]
pub struct AppState {
    provider: Arc<dyn EmbeddingProvider>,
    ready: Arc<OnceLock<Result<Arc<Assessor>, String>>>,
}

impl AppState {
    /// State with no taxonomy yet; every route but `/health` answers 503.
    pub fn loading(provider: Arc<dyn EmbeddingProvider>) -> Self {
        AppState {
            provider,
            ready: Arc::new(OnceLock::new()),
        }
    }

    pub fn ready(classifier: Arc<BloomClassifier>, provider: Arc<dyn EmbeddingProvider>) -> Self {
        let s = Self::loading(provider);
        s.install(classifier);
        s
    }

    /// Returns false if the state was already settled.
    pub fn install(&self, classifier: Arc<BloomClassifier>) -> bool {
        let assessor = Assessor::new(classifier, self.provider.clone());
        self.ready.set(Ok(Arc::new(assessor))).is_ok()
    }

    pub fn fail(&self, message: impl Into<String>) -> bool {
        self.ready.set(Err(message.into())).is_ok()
    }

    /// Load WordNet and the seed verbs on a background thread.
    pub fn spawn_load(&self, wordnet_dir: PathBuf, seed_verbs: Option<PathBuf>) -> std::thread::JoinHandle<()> {
        let state = self.clone();
        std::thread::spawn(move || {
            let loaded = VerbTaxonomy::load_dir(&wordnet_dir).map_err(|e| e.to_string()).and_then(|tax| {
                let clusters = match &seed_verbs {
                    Some(p) => BloomClusterSet::load(p).map_err(|e| e.to_string())?,
                    None => BloomClusterSet::default_set(),
                };
                for s in clusters.unresolved_seeds(&tax) {
                    log::warn!("seed verb '{}' is not in WordNet and will be ignored", s);
                }
                Ok(BloomClassifier::new(Arc::new(tax), Arc::new(clusters)))
            });
            match loaded {
                Ok(c) => {
                    log::info!("WordNet loaded from {}", wordnet_dir.display());
                    state.install(Arc::new(c));
                }
                Err(e) => {
                    log::error!("{}", e);
                    state.fail(e);
                }
            }
        })
    }

    pub fn is_ready(&self) -> bool {
        matches!(self.ready.get(), Some(Ok(_)))
    }

    pub fn provider(&self) -> &dyn EmbeddingProvider {
        &*self.provider
    }

    fn assessor(&self) -> Result<Arc<Assessor>, ApiError> {
        match self.ready.get() {
            Some(Ok(a)) => Ok(a.clone()),
            Some(Err(e)) => Err(ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "unavailable",
                format!("WordNet failed to load: {}", e),
            )),
            None => Err(ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "loading",
                "WordNet is still loading",
            )),
        }
    }
}

/// Allowed browser origins. Empty means any origin.
#[derive(Debug, Clone, Default)]
pub struct CorsConfig {
    pub origins: Vec<String>,
}

impl CorsConfig {
    fn layer(&self) -> Result<CorsLayer, String> {
        let base = CorsLayer::new().allow_methods(Any).allow_headers(Any);
        if self.origins.is_empty() {
            return Ok(base.allow_origin(Any));
        }
        let origins = self
            .origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| format!("invalid origin '{}'", o)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(base.allow_origin(AllowOrigin::list(origins)))
    }
}

pub fn router(state: AppState, cors: &CorsConfig) -> Result<Router, String> {
    Ok(Router::new()
        .route("/assess", post(assess))
        .route("/classify-verb", post(classify_verb))
        .route("/health", get(health))
        .layer(cors.layer()?)
        .with_state(state))
}

/// Serve until ctrl-c.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigInput {
    impact: Option<f64>,
    sim_threshold: Option<f64>,
    lo_threshold: Option<f64>,
}

impl ConfigInput {
    fn resolve(&self) -> Result<AssessmentConfig, ApiError> {
        let n = AssessmentConfig::NEUTRAL;
        AssessmentConfig::new(
            self.impact.unwrap_or(n.impact),
            self.sim_threshold.unwrap_or(n.sim_threshold),
            self.lo_threshold.unwrap_or(n.lo_threshold),
        )
        .map_err(|e| match e {
            AggregationError::Config { field, message } => ApiError::invalid(format!("config.{}", field), message),
            other => ApiError::internal(other.to_string()),
        })
    }
}

/// `{receiving, sending, config?}`; missing config fields take the
/// neutral values.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessRequest {
    pub receiving: Course,
    pub sending: Course,
    #[serde(default)]
    config: ConfigInput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyRequest {
    verb: String,
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
    wordnet_loaded: bool,
    provider_kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn parse<'a, T: Deserialize<'a>>(body: &'a [u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::malformed(e.to_string()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {}", e)))
}

async fn assess(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: AssessRequest = parse(&body)?;
    let cfg = req.config.resolve()?;
    let assessor = state.assessor()?;
    let out = blocking(move || assessor.assess_pair(&req.receiving, &req.sending, &cfg)).await??;
    Ok(canonical(StatusCode::OK, &out))
}

async fn classify_verb(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: ClassifyRequest = parse(&body)?;
    let assessor = state.assessor()?;
    let out = blocking(move || assessor.classifier().assign(&req.verb)).await?;
    match out {
        Ok(a) => Ok(canonical(StatusCode::OK, &a)),
        Err(e @ (BloomError::EmptyVerb | BloomError::UnknownVerb(_) | BloomError::Unscorable(_))) => {
            Err(ApiError::invalid("verb", e.to_string()))
        }
        Err(e) => Err(ApiError::internal(e.to_string())),
    }
}

async fn health(State(state): State<AppState>) -> Response {
    let provider_kind = state.provider.kind().as_str();
    let (status, body) = match state.ready.get() {
        Some(Ok(_)) => (
            StatusCode::OK,
            Health {
                status: "ok",
                wordnet_loaded: true,
                provider_kind,
                error: None,
            },
        ),
        Some(Err(e)) => (
            StatusCode::SERVICE_UNAVAILABLE,
            Health {
                status: "error",
                wordnet_loaded: false,
                provider_kind,
                error: Some(e.clone()),
            },
        ),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Health {
                status: "loading",
                wordnet_loaded: false,
                provider_kind,
                error: None,
            },
        ),
    };
    canonical(status, &body)
}
