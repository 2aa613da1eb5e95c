//! Bloom's taxonomy levels for learning outcomes.
//!
//! Verbs are mapped to one of six ordered clusters, by seed lookup or by
//! silhouette width over Wu-Palmer distances, and each learning outcome takes
//! the highest level among its verbs.

mod detect;

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::course::LearningOutcomeInput;
use crate::grid::{GridError, GridKind, SimilarityGrid};
use crate::measures::wup_max_over;
use crate::wordnet::{resolve_lemma, SynsetId, VerbTaxonomy};

pub use detect::{detect_verbs, DEFAULT_STOP_VERBS};

pub const LEVELS: usize = 6;

const DEFAULT_SEEDS: &str = include_str!("../../data/bloom_seeds.toml");

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum BloomError {
    #[error("invalid seed verbs: {0}")]
    Config(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("learning outcome text is empty")]
    EmptyText,
    #[error("verb must not be empty")]
    EmptyVerb,
    #[error("'{0}' has no verb synsets")]
    UnknownVerb(String),
    #[error("no cluster has a scorable seed verb for '{0}'")]
    Unscorable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BloomCluster {
    pub level: u8,
    pub name: String,
    #[serde(rename = "verbs")]
    pub seed_verbs: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedFile {
    #[serde(rename = "cluster")]
    clusters: Vec<BloomCluster>,
}

/// Six ordered clusters of illustrative verbs, levels 1 through 6.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BloomClusterSet {
    clusters: Vec<BloomCluster>,
}

impl BloomClusterSet {
    pub fn new(clusters: Vec<BloomCluster>) -> Result<Self, BloomError> {
        if clusters.len() != LEVELS {
            return Err(BloomError::Config(format!(
                "expected {} clusters, found {}",
                LEVELS,
                clusters.len()
            )));
        }
        let mut seen: HashMap<String, u8> = HashMap::new();
        let mut clusters = clusters;
        for (i, c) in clusters.iter_mut().enumerate() {
            if c.level as usize != i + 1 {
                return Err(BloomError::Config(format!(
                    "cluster {} has level {}, expected {}",
                    i + 1,
                    c.level,
                    i + 1
                )));
            }
            if c.seed_verbs.is_empty() {
                return Err(BloomError::Config(format!("level {} has no verbs", c.level)));
            }
            for v in c.seed_verbs.iter_mut() {
                *v = v.trim().to_lowercase();
                if v.is_empty() {
                    return Err(BloomError::Config(format!("level {} has an empty verb", c.level)));
                }
                if let Some(prev) = seen.insert(v.clone(), c.level) {
                    return Err(BloomError::Config(format!(
                        "'{}' is listed at levels {} and {}",
                        v, prev, c.level
                    )));
                }
            }
        }
        Ok(BloomClusterSet { clusters })
    }

    pub fn from_toml(text: &str) -> Result<Self, BloomError> {
        let file: SeedFile = toml::from_str(text).map_err(|e| BloomError::Config(e.to_string()))?;
        Self::new(file.clusters)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BloomError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| BloomError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// The bundled seed lists.
    pub fn default_set() -> Self {
        Self::from_toml(DEFAULT_SEEDS).expect("bundled seed file is valid")
    }

    pub fn clusters(&self) -> &[BloomCluster] {
        &self.clusters
    }

    pub fn level_name(&self, level: u8) -> Option<&str> {
        self.clusters
            .get((level as usize).checked_sub(1)?)
            .map(|c| c.name.as_str())
    }

    pub fn seed_level(&self, verb: &str) -> Option<u8> {
        self.clusters
            .iter()
            .find(|c| c.seed_verbs.iter().any(|s| s == verb))
            .map(|c| c.level)
    }

    /// Seed verbs the taxonomy does not know.
    pub fn unresolved_seeds(&self, tax: &VerbTaxonomy) -> Vec<String> {
        self.clusters
            .iter()
            .flat_map(|c| c.seed_verbs.iter())
            .filter(|v| resolve_lemma(tax, v).is_none())
            .cloned()
            .collect()
    }

    /// Copy with `verb` appended to the seeds of `level`.
    pub fn with_seed(&self, level: u8, verb: &str) -> Result<Self, BloomError> {
        let mut clusters = self.clusters.clone();
        let c = clusters
            .get_mut((level as usize).wrapping_sub(1))
            .ok_or_else(|| BloomError::Config(format!("no level {}", level)))?;
        c.seed_verbs.push(verb.to_string());
        Self::new(clusters)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignMethod {
    Seed,
    Silhouette,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub verb: String,
    pub level: u8,
    pub method: AssignMethod,
    /// One entry per level; `None` for clusters without scorable seeds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub silhouette_scores: Option<Vec<Option<f64>>>,
}

fn senses_of<'t>(tax: &'t VerbTaxonomy, word: &str) -> &'t [SynsetId] {
    match resolve_lemma(tax, word) {
        Some(l) => tax.synsets_of(&l),
        None => &[],
    }
}

/// Silhouette width of `verb` against every cluster.
///
/// Distance is `1 - wup_max`. For cluster `k`, `a` is the mean distance to
/// its scorable seeds and `b` the smallest such mean among the other
/// clusters; `S = (b - a) / max(a, b)`. Ties in the argmax go to the lower
/// level.
pub fn silhouette_assign(
    verb: &str,
    clusters: &BloomClusterSet,
    tax: &VerbTaxonomy,
) -> Result<ClusterAssignment, BloomError> {
    let verb = verb.trim().to_lowercase();
    let lemma = resolve_lemma(tax, &verb).ok_or_else(|| BloomError::UnknownVerb(verb.clone()))?;
    let senses = tax.synsets_of(&lemma);

    let mean_dist: Vec<Option<f64>> = clusters
        .clusters
        .iter()
        .map(|c| {
            let d: Vec<f64> = c
                .seed_verbs
                .iter()
                .filter_map(|s| wup_max_over(tax, senses, senses_of(tax, s)))
                .map(|w| 1.0 - w)
                .collect();
            (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
        })
        .collect();

    let scores: Vec<Option<f64>> = (0..LEVELS)
        .map(|k| {
            let a = mean_dist[k]?;
            let b = mean_dist
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .filter_map(|(_, m)| *m)
                .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |x| x.min(m))));
            let s = match b {
                Some(b) if a.max(b) > 0.0 => (b - a) / a.max(b),
                _ => 0.0,
            };
            Some(s)
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((k, s));
            }
        }
    }
    let (k, _) = best.ok_or_else(|| BloomError::Unscorable(lemma.clone()))?;
    Ok(ClusterAssignment {
        verb: lemma,
        level: clusters.clusters[k].level,
        method: AssignMethod::Silhouette,
        silhouette_scores: Some(scores),
    })
}

/// Seed lookup first, silhouette assignment otherwise.
pub fn assign_verb(
    verb: &str,
    clusters: &BloomClusterSet,
    tax: &VerbTaxonomy,
) -> Result<ClusterAssignment, BloomError> {
    let raw = verb.trim().to_lowercase();
    if raw.is_empty() {
        return Err(BloomError::EmptyVerb);
    }
    let lemma = resolve_lemma(tax, &raw);
    for form in lemma.iter().chain(std::iter::once(&raw)) {
        if let Some(level) = clusters.seed_level(form) {
            return Ok(ClusterAssignment {
                verb: form.clone(),
                level,
                method: AssignMethod::Seed,
                silhouette_scores: None,
            });
        }
    }
    silhouette_assign(&raw, clusters, tax)
}

/// A learning outcome after verb detection and level assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningOutcome {
    pub id: String,
    pub text: String,
    pub verbs: Vec<String>,
    pub level: Option<u8>,
    pub assignments: Vec<ClusterAssignment>,
    /// Detected verbs that could not be assigned, with the reason.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<(String, String)>,
}

/// Highest level among the assigned verbs, or `None` when there are none.
pub fn lo_level(assignments: &[ClusterAssignment]) -> Option<u8> {
    assignments.iter().map(|a| a.level).max()
}

/// Cell `(i, j)` is `1 - |level_i - level_j| / 5`. Cells touching an
/// unassigned outcome hold 0.5 and are flagged.
pub fn taxonomic_grid(
    receiving: &[LearningOutcome],
    sending: &[LearningOutcome],
) -> Result<SimilarityGrid, GridError> {
    let mut flagged = Vec::new();
    let cells = receiving
        .iter()
        .enumerate()
        .map(|(i, r)| {
            sending
                .iter()
                .enumerate()
                .map(|(j, s)| match (r.level, s.level) {
                    (Some(a), Some(b)) => 1.0 - (a as f64 - b as f64).abs() / (LEVELS - 1) as f64,
                    _ => {
                        flagged.push((i, j));
                        0.5
                    }
                })
                .collect()
        })
        .collect();
    let mut grid = SimilarityGrid::new(
        GridKind::Taxonomic,
        receiving.iter().map(|l| l.id.clone()).collect(),
        sending.iter().map(|l| l.id.clone()).collect(),
        cells,
    )?;
    grid.flagged = flagged;
    Ok(grid)
}

/// Shared classifier with a per-instance memo of verb assignments.
pub struct BloomClassifier {
    tax: Arc<VerbTaxonomy>,
    clusters: Arc<BloomClusterSet>,
    stop_verbs: Vec<String>,
    memo: RwLock<HashMap<String, Result<ClusterAssignment, BloomError>>>,
}

impl BloomClassifier {
    pub fn new(tax: Arc<VerbTaxonomy>, clusters: Arc<BloomClusterSet>) -> Self {
        let missing = clusters.unresolved_seeds(&tax);
        if !missing.is_empty() {
            log::warn!("seed verbs not in WordNet: {}", missing.join(", "));
        }
        BloomClassifier {
            tax,
            clusters,
            stop_verbs: DEFAULT_STOP_VERBS.iter().map(|s| s.to_string()).collect(),
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_stop_verbs(mut self, stop_verbs: Vec<String>) -> Self {
        self.stop_verbs = stop_verbs.into_iter().map(|s| s.trim().to_lowercase()).collect();
        self
    }

    pub fn taxonomy(&self) -> &Arc<VerbTaxonomy> {
        &self.tax
    }

    pub fn clusters(&self) -> &Arc<BloomClusterSet> {
        &self.clusters
    }

    pub fn stop_verbs(&self) -> &[String] {
        &self.stop_verbs
    }

    pub fn assign(&self, verb: &str) -> Result<ClusterAssignment, BloomError> {
        let key = verb.trim().to_lowercase();
        if let Some(hit) = self.memo.read().expect("memo lock").get(&key) {
            return hit.clone();
        }
        let res = assign_verb(&key, &self.clusters, &self.tax);
        self.memo
            .write()
            .expect("memo lock")
            .entry(key)
            .or_insert(res)
            .clone()
    }

    pub fn detect(&self, text: &str) -> Result<Vec<String>, BloomError> {
        detect_verbs(text, &self.tax, &self.stop_verbs).ok_or(BloomError::EmptyText)
    }

    pub fn analyze(&self, lo: &LearningOutcomeInput) -> Result<LearningOutcome, BloomError> {
        let verbs = self.detect(&lo.text)?;
        let mut assignments = Vec::new();
        let mut skipped = Vec::new();
        let mut seen = HashSet::new();
        for v in &verbs {
            match self.assign(v) {
                Ok(a) => {
                    if seen.insert(a.verb.clone()) {
                        assignments.push(a);
                    }
                }
                Err(e) => {
                    log::debug!("verb skipped in {}: {}", lo.id, e);
                    skipped.push((v.clone(), e.to_string()));
                }
            }
        }
        Ok(LearningOutcome {
            id: lo.id.clone(),
            text: lo.text.clone(),
            level: lo_level(&assignments),
            verbs,
            assignments,
            skipped,
        })
    }

    pub fn analyze_all(&self, los: &[LearningOutcomeInput]) -> Result<Vec<LearningOutcome>, BloomError> {
        los.iter().map(|lo| self.analyze(lo)).collect()
    }
}
