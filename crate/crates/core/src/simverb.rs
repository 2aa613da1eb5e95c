//! Verb-pair benchmark evaluation: which similarity measure tracks human
//! judgements best.

use std::io::BufRead;

use rayon::prelude::*;
use serde::Serialize;

use crate::measures::{MeasureId, VerbScorer};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerbPairRecord {
    pub v1: String,
    pub v2: String,
    pub gold_score: f64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dataset is empty")]
    Empty,
    #[error("cannot read dataset: {0}")]
    Io(String),
}

/// Read SimVerb-style rows: `verb1 \t verb2 \t POS \t score \t relation`.
///
/// Only rows with POS `V` are kept. The three-column variant
/// `verb1 \t verb2 \t score` without POS and relation is also accepted.
/// Scores must lie in `[0, 10]`.
pub fn read_simverb(reader: impl BufRead) -> Result<Vec<VerbPairRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DatasetError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let score_field = match fields.len() {
            3 => fields[2],
            n if n >= 4 => {
                if fields[2] != "V" {
                    continue;
                }
                fields[3]
            }
            n => {
                return Err(DatasetError::Parse {
                    line: line_no,
                    message: format!("expected 3 or at least 4 tab-separated fields, found {}", n),
                })
            }
        };
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(DatasetError::Parse {
                line: line_no,
                message: "empty verb".into(),
            });
        }
        let score: f64 = score_field.parse().map_err(|_| DatasetError::Parse {
            line: line_no,
            message: format!("bad score '{}'", score_field),
        })?;
        if !(0.0..=10.0).contains(&score) {
            return Err(DatasetError::Parse {
                line: line_no,
                message: format!("score {} outside [0, 10]", score),
            });
        }
        out.push(VerbPairRecord {
            v1: fields[0].to_lowercase(),
            v2: fields[1].to_lowercase(),
            gold_score: score,
        });
    }
    if out.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CorrelationError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("series has zero variance")]
    ZeroVariance,
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, CorrelationError> {
    if xs.len() != ys.len() {
        return Err(CorrelationError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(CorrelationError::TooShort(n));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureRow {
    pub measure: MeasureId,
    /// `None` when fewer than two pairs were scorable or a series was flat.
    pub r: Option<f64>,
    pub scored: usize,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub pairs: usize,
    pub rows: Vec<MeasureRow>,
    pub best_measure: Option<MeasureId>,
}

impl MeasureReport {
    pub fn row(&self, m: &MeasureId) -> Option<&MeasureRow> {
        self.rows.iter().find(|r| &r.measure == m)
    }

    /// Fixed-width summary table.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<20} {:>9} {:>9} {:>8}\n", "measure", "pearson_r", "coverage", "scored");
        for row in &self.rows {
            let r = row.r.map(|r| format!("{:.4}", r)).unwrap_or_else(|| "n/a".into());
            out.push_str(&format!(
                "{:<20} {:>9} {:>9.4} {:>8}\n",
                row.measure.to_string(),
                r,
                row.coverage,
                row.scored
            ));
        }
        match &self.best_measure {
            Some(b) => out.push_str(&format!("best measure over {} pairs: {}\n", self.pairs, b)),
            None => out.push_str("no measure could be correlated\n"),
        }
        out
    }
}

/// Correlate each measure with the gold scores over the pairs it can score.
///
/// Unscorable pairs are skipped and show up as reduced coverage. The best
/// measure is the highest r; ties go to the earlier measure in `measures`.
pub fn evaluate_measures(
    scorer: &VerbScorer<'_>,
    dataset: &[VerbPairRecord],
    measures: &[MeasureId],
) -> Result<MeasureReport, DatasetError> {
    if dataset.is_empty() {
        return Err(DatasetError::Empty);
    }
    // One row of scores per pair, computed in parallel; collect keeps order.
    let scores: Vec<Vec<Option<f64>>> = dataset
        .par_iter()
        .map(|rec| {
            let graph = scorer.graph_scores(&rec.v1, &rec.v2);
            measures
                .iter()
                .map(|m| match m {
                    MeasureId::Graph(g, sel) => graph.get(*g, *sel),
                    other => scorer.verb_sim(other, &rec.v1, &rec.v2),
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(measures.len());
    let mut best: Option<(usize, f64)> = None;
    for (k, m) in measures.iter().enumerate() {
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        for (rec, row) in dataset.iter().zip(&scores) {
            if let Some(s) = row[k] {
                gold.push(rec.gold_score);
                pred.push(s);
            }
        }
        let r = pearson(&pred, &gold).ok();
        if let Some(r) = r {
            if best.map_or(true, |(_, b)| r > b) {
                best = Some((k, r));
            }
        }
        rows.push(MeasureRow {
            measure: m.clone(),
            r,
            scored: pred.len(),
            coverage: pred.len() as f64 / dataset.len() as f64,
        });
    }
    Ok(MeasureReport {
        pairs: dataset.len(),
        rows,
        best_measure: best.map(|(k, _)| measures[k].clone()),
    })
}
