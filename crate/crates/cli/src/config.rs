//! Settings file and provider wiring.
//!
//! Precedence for every setting: command-line flag, then environment
//! variable, then the `--config` file, then the built-in default.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use tca_core::aggregation::AssessmentConfig;
use tca_core::bloom::{BloomClassifier, BloomClusterSet};
use tca_core::embedding::{
    CachedFileProvider, CachingProvider, EmbeddingCache, EmbeddingProvider, HashingProvider, RemoteConfig,
    RemoteProvider,
};
use tca_core::wordnet::VerbTaxonomy;

use crate::CliError;

pub const DEFAULT_WORDNET_DIR: &str = "data/wordnet-3.0";
pub const PROVIDER_URL_ENV: &str = "TCA_PROVIDER_URL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialAssessment {
    pub impact: Option<f64>,
    pub sim_threshold: Option<f64>,
    pub lo_threshold: Option<f64>,
}

/// Contents of a `--config` TOML file. Relative paths are taken from the
/// file's directory.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub wordnet_dir: Option<PathBuf>,
    pub seed_verbs: Option<PathBuf>,
    pub provider: Option<String>,
    pub cache: Option<PathBuf>,
    pub format: Option<Format>,
    pub annotations: Option<PathBuf>,
    pub port: Option<u16>,
    #[serde(default)]
    pub assessment: PartialAssessment,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {}", path.display(), e)))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {}", path.display(), e)))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.wordnet_dir, &mut cfg.seed_verbs, &mut cfg.cache, &mut cfg.annotations]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wordnet_dir: PathBuf,
    pub seed_verbs: Option<PathBuf>,
    pub provider: ProviderSpec,
    pub cache: Option<PathBuf>,
    pub assessment: AssessmentConfig,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    Test,
    Cache,
    Remote(String),
}

impl ProviderSpec {
    /// `test`, `cache`, `remote:URL`, or bare `remote` with the URL from
    /// `env_url`. A configured remote endpoint is replaced by `env_url`
    /// unless it came from the command line.
    pub fn resolve(flag: Option<&str>, file: Option<&str>, env_url: Option<&str>) -> Result<Self, CliError> {
        let env_url = env_url.filter(|u| !u.trim().is_empty());
        let (spec, from_flag) = match (flag, file) {
            (Some(f), _) => (f, true),
            (None, Some(f)) => (f, false),
            (None, None) => {
                return Ok(match env_url {
                    Some(u) => ProviderSpec::Remote(u.to_string()),
                    None => ProviderSpec::Test,
                })
            }
        };
        match spec.trim() {
            "test" => Ok(ProviderSpec::Test),
            "cache" => Ok(ProviderSpec::Cache),
            "remote" => env_url
                .map(|u| ProviderSpec::Remote(u.to_string()))
                .ok_or_else(|| CliError::Input(format!("--provider remote needs a URL: use remote:URL or set {}", PROVIDER_URL_ENV))),
            s => match s.strip_prefix("remote:") {
                Some(url) if !url.is_empty() => Ok(ProviderSpec::Remote(match env_url {
                    Some(u) if !from_flag => u.to_string(),
                    _ => url.to_string(),
                })),
                _ => Err(CliError::Input(format!(
                    "unknown provider '{}' (expected test, cache or remote:URL)",
                    s
                ))),
            },
        }
    }

    /// Build the provider; `cache` fronts a remote provider or backs the
    /// offline `cache` provider.
    pub fn build(&self, cache: Option<&Path>) -> Result<Arc<dyn EmbeddingProvider>, CliError> {
        match self {
            ProviderSpec::Test => {
                if cache.is_some() {
                    log::warn!("--cache is ignored by the test provider");
                }
                Ok(Arc::new(HashingProvider::new()))
            }
            ProviderSpec::Cache => {
                let path = cache.ok_or_else(|| CliError::Input("--provider cache needs --cache FILE".into()))?;
                if !path.exists() {
                    return Err(CliError::Resource(format!("embedding cache {} not found", path.display())));
                }
                let name = RemoteConfig::new("").name;
                Ok(Arc::new(CachedFileProvider::new(name, Arc::new(EmbeddingCache::open(path)?))))
            }
            ProviderSpec::Remote(url) => {
                let remote = RemoteProvider::new(RemoteConfig::new(url.clone()));
                match cache {
                    Some(p) => Ok(Arc::new(CachingProvider::new(remote, Arc::new(EmbeddingCache::open(p)?)))),
                    None => Ok(Arc::new(remote)),
                }
            }
        }
    }
}

pub fn load_classifier(wordnet_dir: &Path, seed_verbs: Option<&Path>) -> Result<BloomClassifier, CliError> {
    if !wordnet_dir.is_dir() {
        return Err(CliError::Resource(format!(
            "WordNet directory {} not found (set --wordnet-dir or TCA_WORDNET_DIR)",
            wordnet_dir.display()
        )));
    }
    let tax = VerbTaxonomy::load_dir(wordnet_dir)
        .map_err(|e| CliError::Resource(format!("WordNet {}: {}", wordnet_dir.display(), e)))?;
    let clusters = match seed_verbs {
        Some(p) => BloomClusterSet::load(p).map_err(|e| CliError::Resource(e.to_string()))?,
        None => BloomClusterSet::default_set(),
    };
    for s in clusters.unresolved_seeds(&tax) {
        log::warn!("seed verb '{}' is not in WordNet and will be ignored", s);
    }
    Ok(BloomClassifier::new(Arc::new(tax), Arc::new(clusters)))
}
