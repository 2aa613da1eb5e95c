//! The three passes composed: taxonomic grid, semantic grid, aggregation.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{
    agreement, decide, final_grid, AggregationError, AnnotationRecord, AssessmentConfig, CreditDecision, Percent,
    Verdict,
};
use crate::bloom::{taxonomic_grid, BloomClassifier, BloomError, LearningOutcome};
use crate::course::{Course, CourseError, CoursePair, Role};
use crate::embedding::{EmbeddingError, EmbeddingProvider};
use crate::grid::{GridError, SimilarityGrid};
use crate::semantic::{semantic_grid, SemanticError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pass {
    Input,
    Taxonomic,
    Semantic,
    Aggregation,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PipelineError {
    #[error("input: {0}")]
    Input(#[from] CourseError),
    #[error("taxonomic pass: {0}")]
    Bloom(#[from] BloomError),
    #[error("taxonomic pass: {0}")]
    TaxonomicGrid(GridError),
    #[error("semantic pass: {0}")]
    Semantic(#[from] SemanticError),
    #[error("aggregation pass: {0}")]
    Aggregation(#[from] AggregationError),
}

impl PipelineError {
    pub fn pass(&self) -> Pass {
        match self {
            PipelineError::Input(_) => Pass::Input,
            PipelineError::Bloom(_) | PipelineError::TaxonomicGrid(_) => Pass::Taxonomic,
            PipelineError::Semantic(_) => Pass::Semantic,
            PipelineError::Aggregation(_) => Pass::Aggregation,
        }
    }

    /// The embedding failure behind a semantic-pass error, if any.
    pub fn embedding_error(&self) -> Option<&EmbeddingError> {
        match self {
            PipelineError::Semantic(SemanticError::Provider { source, .. }) => Some(source),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseAnalysis {
    pub course_id: String,
    pub learning_outcomes: Vec<LearningOutcome>,
}

/// Everything that does not depend on the leniency parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairGrids {
    pub receiving: CourseAnalysis,
    pub sending: CourseAnalysis,
    pub taxonomic_grid: SimilarityGrid,
    pub semantic_grid: SimilarityGrid,
}

impl PairGrids {
    pub fn decide(&self, cfg: &AssessmentConfig) -> Result<CreditDecision, AggregationError> {
        cfg.validate()?;
        let fg = final_grid(&self.semantic_grid, &self.taxonomic_grid, cfg.impact)?;
        decide(&fg, cfg)
    }
}

/// Full result for one course pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub config: AssessmentConfig,
    pub provider: String,
    #[serde(flatten)]
    pub grids: PairGrids,
    #[serde(flatten)]
    pub decision: CreditDecision,
}

pub struct Assessor {
    classifier: Arc<BloomClassifier>,
    provider: Arc<dyn EmbeddingProvider>,
}

impl Assessor {
    pub fn new(classifier: Arc<BloomClassifier>, provider: Arc<dyn EmbeddingProvider>) -> Self {
        Assessor { classifier, provider }
    }

    pub fn classifier(&self) -> &BloomClassifier {
        &self.classifier
    }

    pub fn provider(&self) -> &dyn EmbeddingProvider {
        &*self.provider
    }

    fn analyze(&self, course: &Course) -> Result<CourseAnalysis, PipelineError> {
        Ok(CourseAnalysis {
            course_id: course.course_id.clone(),
            learning_outcomes: self.classifier.analyze_all(&course.learning_outcomes)?,
        })
    }

    /// Passes 1 and 2. Receiving outcomes become rows.
    pub fn grids(&self, receiving: &Course, sending: &Course) -> Result<PairGrids, PipelineError> {
        receiving.validate_as(Role::Receiving, "receiving")?;
        sending.validate_as(Role::Sending, "sending")?;
        let r = self.analyze(receiving)?;
        let s = self.analyze(sending)?;
        let taxonomic_grid =
            taxonomic_grid(&r.learning_outcomes, &s.learning_outcomes).map_err(PipelineError::TaxonomicGrid)?;
        let semantic_grid = semantic_grid(&receiving.learning_outcomes, &sending.learning_outcomes, &*self.provider)?;
        Ok(PairGrids {
            receiving: r,
            sending: s,
            taxonomic_grid,
            semantic_grid,
        })
    }

    pub fn assess_pair(
        &self,
        receiving: &Course,
        sending: &Course,
        cfg: &AssessmentConfig,
    ) -> Result<Assessment, PipelineError> {
        cfg.validate()?;
        let grids = self.grids(receiving, sending)?;
        let decision = grids.decide(cfg)?;
        Ok(Assessment {
            config: *cfg,
            provider: self.provider.name().to_string(),
            grids,
            decision,
        })
    }

    /// Decide every pair under every setting. Grids are computed once per
    /// pair; results keep the order of `pairs` and `settings`.
    pub fn sweep(
        &self,
        pairs: &[CoursePair],
        settings: &[AssessmentConfig],
        annotations: Option<&[AnnotationRecord]>,
    ) -> Result<SweepReport, PipelineError> {
        if settings.is_empty() {
            return Err(AggregationError::Config {
                field: "settings",
                message: "no parameter values to sweep".into(),
            }
            .into());
        }
        for s in settings {
            s.validate()?;
        }
        let grids: Vec<PairGrids> = pairs
            .iter()
            .map(|p| self.grids(&p.receiving, &p.sending))
            .collect::<Result<_, _>>()?;
        let columns: Vec<Vec<CreditDecision>> = settings
            .par_iter()
            .map(|cfg| grids.iter().map(|g| g.decide(cfg)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let rows = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| SweepRow {
                pair_id: p.id.clone(),
                decisions: columns.iter().map(|c| c[i].decision).collect(),
                matched_counts: columns.iter().map(|c| c[i].matched_count).collect(),
            })
            .collect();
        let agreement = match annotations {
            None => None,
            Some(ann) => Some(
                columns
                    .iter()
                    .map(|c| {
                        let d: Vec<(String, Verdict)> =
                            pairs.iter().zip(c).map(|(p, d)| (p.id.clone(), d.decision)).collect();
                        agreement(&d, ann)
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        Ok(SweepReport {
            settings: settings.to_vec(),
            rows,
            agreement,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub pair_id: String,
    pub decisions: Vec<Verdict>,
    pub matched_counts: Vec<usize>,
}

/// One column per setting, one row per course pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub settings: Vec<AssessmentConfig>,
    pub rows: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<Vec<Percent>>,
}

impl SweepReport {
    pub fn to_table(&self) -> String {
        let head: Vec<String> = self
            .settings
            .iter()
            .map(|s| format!("{}/{}/{}", s.impact, s.sim_threshold, s.lo_threshold))
            .collect();
        let w = head.iter().map(|h| h.len()).max().unwrap_or(0).max(8);
        let idw = self.rows.iter().map(|r| r.pair_id.len()).max().unwrap_or(0).max(9);
        let mut out = format!("{:<idw$}", "pair", idw = idw);
        for h in &head {
            out.push_str(&format!(" {:>w$}", h, w = w));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{:<idw$}", r.pair_id, idw = idw));
            for (d, k) in r.decisions.iter().zip(&r.matched_counts) {
                out.push_str(&format!(" {:>w$}", format!("{} ({})", d, k), w = w));
            }
            out.push('\n');
        }
        if let Some(a) = &self.agreement {
            out.push_str(&format!("{:<idw$}", "agreement", idw = idw));
            for p in a {
                out.push_str(&format!(" {:>w$}", p.to_string(), w = w));
            }
            out.push('\n');
        }
        out
    }
}
