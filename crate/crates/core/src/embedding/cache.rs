//! Append-only embedding cache file.
//!
//! Layout: a header line `# tca embedding cache v1`, then one record per
//! line with four tab-separated fields:
//!
//! ```text
//! <key: 64 hex>\t<dimension>\t<space-separated values>\t<checksum: 16 hex>
//! ```
//!
//! The key is [`cache_key`](super::cache_key) of provider name and text. The
//! checksum is the first 16 hex digits of SHA-256 over the first three
//! fields joined by tabs.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use sha2::{Digest, Sha256};

use super::{
    cache_key, check_texts, EmbeddingError, EmbeddingProvider, EmbeddingVector, ProviderKind,
};

pub const CACHE_HEADER: &str = "# tca embedding cache v1";

fn checksum(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))[..16].to_string()
}

fn format_record(key: &str, values: &[f64]) -> String {
    let vals = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    let body = format!("{}\t{}\t{}", key, values.len(), vals);
    let sum = checksum(&body);
    format!("{}\t{}", body, sum)
}

fn parse_record(line: &str) -> Result<(String, Vec<f64>), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 fields, found {}", fields.len()));
    }
    let body = format!("{}\t{}\t{}", fields[0], fields[1], fields[2]);
    if checksum(&body) != fields[3] {
        return Err("checksum mismatch".into());
    }
    let key = fields[0];
    if key.len() != 64 || !key.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err("bad key".into());
    }
    let dim: usize = fields[1].parse().map_err(|_| "bad dimension".to_string())?;
    let values = fields[2]
        .split(' ')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| "bad value".to_string())?;
    if values.len() != dim || dim == 0 {
        return Err(format!("dimension {} but {} values", dim, values.len()));
    }
    Ok((key.to_string(), values))
}

/// Outcome of checking a cache file record by record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheReport {
    pub records: usize,
    /// `(line, reason)` for every damaged record.
    pub corrupt: Vec<(usize, String)>,
}

impl CacheReport {
    pub fn is_clean(&self) -> bool {
        self.corrupt.is_empty()
    }
}

/// Embeddings keyed by provider and normalized text, optionally persisted.
/// Reads run concurrently; writes are serialized.
#[derive(Debug, Default)]
pub struct EmbeddingCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<String, Vec<f64>>>,
    writer: Mutex<Option<File>>,
}

impl EmbeddingCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Open or create a cache file. Any damaged record is an error.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let path = path.as_ref().to_path_buf();
        let io_err = |e: std::io::Error| EmbeddingError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut entries = HashMap::new();
        if path.exists() {
            let (report, loaded) = scan(&path)?;
            if let Some((line, message)) = report.corrupt.into_iter().next() {
                return Err(EmbeddingError::CorruptCache {
                    path: path.display().to_string(),
                    line,
                    message,
                });
            }
            entries = loaded;
        } else {
            let mut f = File::create(&path).map_err(io_err)?;
            writeln!(f, "{}", CACHE_HEADER).map_err(io_err)?;
        }
        let file = OpenOptions::new().append(true).open(&path).map_err(io_err)?;
        Ok(EmbeddingCache {
            path: Some(path),
            entries: RwLock::new(entries),
            writer: Mutex::new(Some(file)),
        })
    }

    /// Check every record of a cache file without loading it for use.
    pub fn verify(path: impl AsRef<Path>) -> Result<CacheReport, EmbeddingError> {
        scan(path.as_ref()).map(|(r, _)| r)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, provider: &str, text: &str) -> Option<EmbeddingVector> {
        let key = cache_key(provider, text);
        let values = self.entries.read().expect("cache lock").get(&key)?.clone();
        EmbeddingVector::new(values).ok()
    }

    /// Store a vector; a key already present keeps its first value.
    pub fn insert(&self, provider: &str, text: &str, v: &EmbeddingVector) -> Result<(), EmbeddingError> {
        let key = cache_key(provider, text);
        let mut writer = self.writer.lock().expect("cache lock");
        if self.entries.read().expect("cache lock").contains_key(&key) {
            return Ok(());
        }
        if let Some(f) = writer.as_mut() {
            let line = format_record(&key, v.values());
            writeln!(f, "{}", line)
                .and_then(|_| f.flush())
                .map_err(|e| EmbeddingError::Io {
                    path: self.path.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                    message: e.to_string(),
                })?;
        }
        self.entries
            .write()
            .expect("cache lock")
            .insert(key, v.values().to_vec());
        Ok(())
    }
}

fn scan(path: &Path) -> Result<(CacheReport, HashMap<String, Vec<f64>>), EmbeddingError> {
    let file = File::open(path).map_err(|e| EmbeddingError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut report = CacheReport {
        records: 0,
        corrupt: Vec::new(),
    };
    let mut entries = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let n = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                report.corrupt.push((n, e.to_string()));
                continue;
            }
        };
        if n == 1 {
            if line != CACHE_HEADER {
                report.corrupt.push((1, "missing cache header".into()));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        match parse_record(&line) {
            Ok((key, values)) => {
                report.records += 1;
                entries.entry(key).or_insert(values);
            }
            Err(message) => report.corrupt.push((n, message)),
        }
    }
    Ok((report, entries))
}

/// Serves embeddings from a cache only; any miss fails the whole batch.
pub struct CachedFileProvider {
    name: String,
    cache: std::sync::Arc<EmbeddingCache>,
}

impl CachedFileProvider {
    /// `name` is the provider whose vectors the cache holds.
    pub fn new(name: impl Into<String>, cache: std::sync::Arc<EmbeddingCache>) -> Self {
        CachedFileProvider {
            name: name.into(),
            cache,
        }
    }
}

impl EmbeddingProvider for CachedFileProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::CachedFile
    }

    fn dimension(&self) -> Option<usize> {
        None
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        check_texts(texts)?;
        let mut out = Vec::with_capacity(texts.len());
        let mut missing = Vec::new();
        for t in texts {
            match self.cache.get(&self.name, t) {
                Some(v) => out.push(v),
                None => {
                    if !missing.contains(t) {
                        missing.push(t.clone());
                    }
                }
            }
        }
        if !missing.is_empty() {
            return Err(EmbeddingError::Miss { texts: missing });
        }
        let dim = out[0].dim();
        if let Some(v) = out.iter().find(|v| v.dim() != dim) {
            return Err(EmbeddingError::DimensionMismatch(dim, v.dim()));
        }
        Ok(out)
    }
}

/// Write-through cache in front of another provider. Only texts missing
/// from the cache reach the inner provider, in a single batch.
pub struct CachingProvider<P> {
    inner: P,
    cache: std::sync::Arc<EmbeddingCache>,
}

impl<P: EmbeddingProvider> CachingProvider<P> {
    pub fn new(inner: P, cache: std::sync::Arc<EmbeddingCache>) -> Self {
        CachingProvider { inner, cache }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn cache(&self) -> &EmbeddingCache {
        &self.cache
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for CachingProvider<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn kind(&self) -> ProviderKind {
        self.inner.kind()
    }

    fn dimension(&self) -> Option<usize> {
        self.inner.dimension()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        check_texts(texts)?;
        let name = self.inner.name().to_string();
        let mut slots: Vec<Option<EmbeddingVector>> = texts.iter().map(|t| self.cache.get(&name, t)).collect();
        let mut missing: Vec<String> = Vec::new();
        for (t, s) in texts.iter().zip(&slots) {
            if s.is_none() && !missing.contains(t) {
                missing.push(t.clone());
            }
        }
        if !missing.is_empty() {
            let fresh = self.inner.embed_batch(&missing)?;
            if fresh.len() != missing.len() {
                return Err(EmbeddingError::Protocol(format!(
                    "asked for {} vectors, got {}",
                    missing.len(),
                    fresh.len()
                )));
            }
            for (t, v) in missing.iter().zip(&fresh) {
                self.cache.insert(&name, t, v)?;
            }
            for (t, s) in texts.iter().zip(slots.iter_mut()) {
                if s.is_none() {
                    let k = missing.iter().position(|m| m == t).expect("missing text");
                    *s = Some(fresh[k].clone());
                }
            }
        }
        Ok(slots.into_iter().map(|s| s.expect("filled")).collect())
    }
}
