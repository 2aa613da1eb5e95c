//! Plain-text word vectors (`word v1 v2 ... vD` per line).

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum WordVectorError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no vectors in input")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct WordVectors {
    dim: usize,
    vectors: HashMap<String, (Vec<f32>, f32)>,
}

impl WordVectors {
    /// Read vectors from text. A leading `count dim` header line, as written
    /// by word2vec, is skipped. Words are lowercased; the first occurrence of
    /// a word wins.
    pub fn from_reader(reader: impl BufRead) -> Result<Self, WordVectorError> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if i == 0 && values.len() == 1 && word.parse::<usize>().is_ok() && values[0].parse::<usize>().is_ok() {
                continue;
            }
            let parsed = values
                .iter()
                .map(|v| v.parse::<f32>())
                .collect::<Result<Vec<f32>, _>>()
                .map_err(|e| WordVectorError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            match dim {
                None if parsed.is_empty() => {
                    return Err(WordVectorError::Parse {
                        line: i + 1,
                        message: "word without values".into(),
                    })
                }
                None => dim = Some(parsed.len()),
                Some(d) if d != parsed.len() => {
                    return Err(WordVectorError::Parse {
                        line: i + 1,
                        message: format!("expected {} values, found {}", d, parsed.len()),
                    })
                }
                Some(_) => {}
            }
            let norm = parsed.iter().map(|x| x * x).sum::<f32>().sqrt();
            vectors.entry(word.to_lowercase()).or_insert((parsed, norm));
        }
        let dim = dim.ok_or(WordVectorError::Empty)?;
        Ok(WordVectors { dim, vectors })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WordVectorError> {
        let f = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(f))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Cosine similarity, `None` when a word is missing or has a zero vector.
    pub fn similarity(&self, w1: &str, w2: &str) -> Option<f64> {
        let (a, na) = self.vectors.get(w1)?;
        let (b, nb) = self.vectors.get(w2)?;
        if *na == 0.0 || *nb == 0.0 {
            return None;
        }
        let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
        Some(dot / (*na as f64 * *nb as f64))
    }
}
