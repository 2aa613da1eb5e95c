//! Course documents and course-pair manifests.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Sending,
    Receiving,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningOutcomeInput {
    pub id: String,
    pub text: String,
}

/// `{course_id, role, learning_outcomes: [{id, text}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Course {
    pub course_id: String,
    pub role: Role,
    pub learning_outcomes: Vec<LearningOutcomeInput>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum CourseError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl CourseError {
    /// Dotted location of the offending field.
    pub fn field_path(&self) -> Option<&str> {
        match self {
            CourseError::Invalid { path, .. } => Some(path),
            CourseError::Io { .. } => None,
        }
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> CourseError {
    CourseError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

impl Course {
    /// Nonempty LO list, unique nonblank ids, nonblank texts.
    pub fn validate(&self, prefix: &str) -> Result<(), CourseError> {
        if self.course_id.trim().is_empty() {
            return Err(invalid(format!("{}.course_id", prefix), "must not be empty"));
        }
        if self.learning_outcomes.is_empty() {
            return Err(invalid(
                format!("{}.learning_outcomes", prefix),
                "at least one learning outcome is required",
            ));
        }
        let mut seen = HashSet::new();
        for (i, lo) in self.learning_outcomes.iter().enumerate() {
            if lo.id.trim().is_empty() {
                return Err(invalid(format!("{}.learning_outcomes[{}].id", prefix, i), "must not be empty"));
            }
            if !seen.insert(lo.id.as_str()) {
                return Err(invalid(
                    format!("{}.learning_outcomes[{}].id", prefix, i),
                    format!("duplicate id '{}'", lo.id),
                ));
            }
            if lo.text.trim().is_empty() {
                return Err(invalid(format!("{}.learning_outcomes[{}].text", prefix, i), "must not be empty"));
            }
        }
        Ok(())
    }

    /// Validate as one side of an assessment.
    pub fn validate_as(&self, role: Role, prefix: &str) -> Result<(), CourseError> {
        if self.role != role {
            return Err(invalid(
                format!("{}.role", prefix),
                format!("expected {:?} course, found {:?}", role, self.role).to_lowercase(),
            ));
        }
        self.validate(prefix)
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, CourseError> {
        serde_json::from_str(text).map_err(|e| invalid(origin, e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CourseError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CourseError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn ids(&self) -> Vec<String> {
        self.learning_outcomes.iter().map(|lo| lo.id.clone()).collect()
    }

    pub fn texts(&self) -> Vec<String> {
        self.learning_outcomes.iter().map(|lo| lo.text.clone()).collect()
    }
}

/// One entry in a pairs manifest; paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEntry {
    pub id: String,
    pub receiving: PathBuf,
    pub sending: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairManifest {
    pub pairs: Vec<PairEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoursePair {
    pub id: String,
    pub receiving: Course,
    pub sending: Course,
}

impl PairManifest {
    /// Load a manifest and every course it references.
    pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<CoursePair>, CourseError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CourseError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let manifest: PairManifest =
            serde_json::from_str(&text).map_err(|e| invalid(path.display().to_string(), e.to_string()))?;
        if manifest.pairs.is_empty() {
            return Err(invalid(format!("{}: pairs", path.display()), "manifest lists no pairs"));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(manifest.pairs.len());
        for (i, entry) in manifest.pairs.iter().enumerate() {
            if !seen.insert(entry.id.clone()) {
                return Err(invalid(format!("pairs[{}].id", i), format!("duplicate pair id '{}'", entry.id)));
            }
            let receiving = Course::load(base.join(&entry.receiving))?;
            let sending = Course::load(base.join(&entry.sending))?;
            out.push(CoursePair {
                id: entry.id.clone(),
                receiving,
                sending,
            });
        }
        Ok(out)
    }
}
