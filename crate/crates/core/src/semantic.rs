//! Semantic grid: cosine similarity of learning-outcome embeddings.

use crate::course::{LearningOutcomeInput, Role};
use crate::embedding::{cosine, EmbeddingError, EmbeddingProvider, EmbeddingVector};
use crate::grid::{GridError, GridKind, SimilarityGrid};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SemanticError {
    #[error("embedding {side:?} learning outcomes: {source}")]
    Provider {
        side: Role,
        #[source]
        source: EmbeddingError,
    },
    #[error(transparent)]
    Contract(#[from] EmbeddingError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Grid from already computed vectors; rows and columns follow the inputs.
pub fn grid_from_vectors(
    rows: Vec<String>,
    cols: Vec<String>,
    row_vecs: &[EmbeddingVector],
    col_vecs: &[EmbeddingVector],
) -> Result<SimilarityGrid, SemanticError> {
    let cells = row_vecs
        .iter()
        .map(|r| col_vecs.iter().map(|c| cosine(r, c)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimilarityGrid::new(GridKind::Semantic, rows, cols, cells)?)
}

/// `cell[i][j] = cosine(embed(receiving[i]), embed(sending[j]))`, with one
/// provider call per side.
pub fn semantic_grid(
    receiving: &[LearningOutcomeInput],
    sending: &[LearningOutcomeInput],
    provider: &dyn EmbeddingProvider,
) -> Result<SimilarityGrid, SemanticError> {
    if receiving.is_empty() || sending.is_empty() {
        return Err(GridError::Empty.into());
    }
    let embed = |los: &[LearningOutcomeInput], side| {
        let texts: Vec<String> = los.iter().map(|l| l.text.clone()).collect();
        let vecs = provider
            .embed_batch(&texts)
            .map_err(|source| SemanticError::Provider { side, source })?;
        if vecs.len() != texts.len() {
            return Err(SemanticError::Provider {
                side,
                source: EmbeddingError::Protocol(format!("{} texts, {} vectors", texts.len(), vecs.len())),
            });
        }
        Ok(vecs)
    };
    let rv = embed(receiving, Role::Receiving)?;
    let sv = embed(sending, Role::Sending)?;
    grid_from_vectors(
        receiving.iter().map(|l| l.id.clone()).collect(),
        sending.iter().map(|l| l.id.clone()).collect(),
        &rv,
        &sv,
    )
}
