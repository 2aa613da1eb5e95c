use tca_core::aggregation::AggregationError;
use tca_core::bloom::BloomError;
use tca_core::course::CourseError;
use tca_core::embedding::EmbeddingError;
use tca_core::pipeline::PipelineError;
use tca_core::semantic::SemanticError;

/// Every failure maps to one of three exit codes.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or unusable input documents.
    #[error("{0}")]
    Input(String),
    /// Missing or broken WordNet, seed file, cache or embedding service.
    #[error("{0}")]
    Resource(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Resource(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn flag_name(field: &str) -> String {
    format!("--{}", field.replace('_', "-"))
}

impl From<AggregationError> for CliError {
    fn from(e: AggregationError) -> Self {
        match e {
            AggregationError::Config { field, message } => CliError::Input(format!("{}: {}", flag_name(field), message)),
            AggregationError::Annotation { .. } | AggregationError::Io { .. } => CliError::Input(e.to_string()),
            AggregationError::Contract(_) | AggregationError::Grid(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<CourseError> for CliError {
    fn from(e: CourseError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        match e {
            EmbeddingError::EmptyText { .. } | EmbeddingError::ZeroVector(_) => CliError::Input(e.to_string()),
            _ => CliError::Resource(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let msg = e.to_string();
        match e {
            PipelineError::Input(_) => CliError::Input(msg),
            PipelineError::Bloom(BloomError::Config(_) | BloomError::Io { .. }) => CliError::Resource(msg),
            PipelineError::Bloom(_) => CliError::Input(msg),
            PipelineError::TaxonomicGrid(_) => CliError::Internal(msg),
            PipelineError::Semantic(SemanticError::Provider { source, .. }) => match CliError::from(source) {
                CliError::Input(_) => CliError::Input(msg),
                _ => CliError::Resource(msg),
            },
            PipelineError::Semantic(SemanticError::Contract(_)) => CliError::Resource(msg),
            PipelineError::Semantic(SemanticError::Grid(_)) => CliError::Internal(msg),
            PipelineError::Aggregation(AggregationError::Config { field, message }) => {
                CliError::Input(format!("{}: {}", flag_name(field), message))
            }
            PipelineError::Aggregation(AggregationError::Annotation { .. } | AggregationError::Io { .. }) => {
                CliError::Input(msg)
            }
            PipelineError::Aggregation(_) => CliError::Internal(msg),
        }
    }
}
