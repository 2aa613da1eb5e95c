//! Combining the taxonomic and semantic grids into a credit decision, and
//! scoring decisions against human annotations.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::grid::{GridError, GridKind, SimilarityGrid};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum AggregationError {
    #[error("{field}: {message}")]
    Config { field: &'static str, message: String },
    #[error("{0}")]
    Contract(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("annotations line {line}: {message}")]
    Annotation { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// The three leniency parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct AssessmentConfig {
    /// Percent of the final score contributed by the taxonomic grid.
    pub impact: f64,
    /// Minimum final cell value for two outcomes to match.
    pub sim_threshold: f64,
    /// Fraction of receiving outcomes that need a match for a yes.
    pub lo_threshold: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_impact")]
    impact: f64,
    #[serde(default = "default_sim")]
    sim_threshold: f64,
    #[serde(default = "default_lo")]
    lo_threshold: f64,
}

fn default_impact() -> f64 {
    AssessmentConfig::NEUTRAL.impact
}
fn default_sim() -> f64 {
    AssessmentConfig::NEUTRAL.sim_threshold
}
fn default_lo() -> f64 {
    AssessmentConfig::NEUTRAL.lo_threshold
}

impl TryFrom<RawConfig> for AssessmentConfig {
    type Error = AggregationError;

    fn try_from(r: RawConfig) -> Result<Self, Self::Error> {
        AssessmentConfig::new(r.impact, r.sim_threshold, r.lo_threshold)
    }
}

impl Default for AssessmentConfig {
    fn default() -> Self {
        Self::NEUTRAL
    }
}

fn check_range(field: &'static str, v: f64, hi: f64) -> Result<(), AggregationError> {
    if v.is_finite() && (0.0..=hi).contains(&v) {
        Ok(())
    } else {
        Err(AggregationError::Config {
            field,
            message: format!("{} is outside [0, {}]", v, hi),
        })
    }
}

impl AssessmentConfig {
    pub const NEUTRAL: AssessmentConfig = AssessmentConfig {
        impact: 30.0,
        sim_threshold: 0.65,
        lo_threshold: 0.5,
    };

    pub fn new(impact: f64, sim_threshold: f64, lo_threshold: f64) -> Result<Self, AggregationError> {
        let c = AssessmentConfig {
            impact,
            sim_threshold,
            lo_threshold,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), AggregationError> {
        check_range("impact", self.impact, 100.0)?;
        check_range("sim_threshold", self.sim_threshold, 1.0)?;
        check_range("lo_threshold", self.lo_threshold, 1.0)
    }
}

/// A threshold in `[0, 1]` held as the exact fraction of its shortest
/// decimal form, so `0.33` means 33/100 rather than the nearest double.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoThreshold {
    num: u128,
    den: u128,
}

impl LoThreshold {
    const MAX_DIGITS: usize = 36;

    pub fn from_f64(x: f64) -> Result<Self, AggregationError> {
        check_range("lo_threshold", x, 1.0)?;
        let s = x.to_string();
        let (int, frac) = s.split_once('.').unwrap_or((&s, ""));
        if frac.len() > Self::MAX_DIGITS {
            // Below 1e-36: any single match clears it, none does not.
            return Ok(LoThreshold {
                num: 1,
                den: 10u128.pow(Self::MAX_DIGITS as u32),
            });
        }
        let den = 10u128.pow(frac.len() as u32);
        let digits = format!("{}{}", int, frac);
        let num: u128 = digits.parse().map_err(|_| AggregationError::Config {
            field: "lo_threshold",
            message: format!("cannot read {} as a decimal", x),
        })?;
        Ok(LoThreshold { num, den })
    }

    pub fn parts(&self) -> (u128, u128) {
        (self.num, self.den)
    }

    /// `matched / total >= self`, exactly.
    pub fn is_met(&self, matched: usize, total: usize) -> bool {
        matched as u128 * self.den >= self.num * total as u128
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
}

impl Verdict {
    pub fn flipped(self) -> Verdict {
        match self {
            Verdict::Yes => Verdict::No,
            Verdict::No => Verdict::Yes,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" | "y" => Ok(Verdict::Yes),
            "no" | "n" => Ok(Verdict::No),
            other => Err(format!("expected yes or no, found '{}'", other)),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedRow {
    pub receiving_id: String,
    pub sending_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditDecision {
    pub decision: Verdict,
    pub matched_rows: Vec<MatchedRow>,
    pub matched_count: usize,
    pub receiving_count: usize,
    pub match_fraction: f64,
    pub final_grid: SimilarityGrid,
}

/// `max(0, (1 - impact/100) * semantic + (impact/100) * taxonomic)` per cell.
pub fn final_grid(
    semantic: &SimilarityGrid,
    taxonomic: &SimilarityGrid,
    impact: f64,
) -> Result<SimilarityGrid, AggregationError> {
    if semantic.kind != GridKind::Semantic || taxonomic.kind != GridKind::Taxonomic {
        return Err(AggregationError::Contract(format!(
            "expected semantic and taxonomic grids, got {:?} and {:?}",
            semantic.kind, taxonomic.kind
        )));
    }
    check_range("impact", impact, 100.0)?;
    if !semantic.same_layout(taxonomic) || semantic.shape() != taxonomic.shape() {
        return Err(GridError::Mismatch.into());
    }
    let w = impact / 100.0;
    let cells = semantic
        .cells
        .iter()
        .zip(&taxonomic.cells)
        .map(|(sr, tr)| {
            sr.iter()
                .zip(tr)
                .map(|(s, t)| ((1.0 - w) * s + w * t).max(0.0))
                .collect()
        })
        .collect();
    let mut g = SimilarityGrid::new(GridKind::Final, semantic.rows.clone(), semantic.cols.clone(), cells)?;
    g.flagged = taxonomic.flagged.clone();
    Ok(g)
}

/// Best column of one row: highest value, lowest index on ties.
fn row_best(row: &[f64]) -> (usize, f64) {
    let mut best = (0, row[0]);
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (j, v);
        }
    }
    best
}

/// A receiving row matches when its maximum reaches `sim_threshold`; the
/// verdict is yes when the matched fraction reaches `lo_threshold`.
pub fn decide(fg: &SimilarityGrid, cfg: &AssessmentConfig) -> Result<CreditDecision, AggregationError> {
    if fg.kind != GridKind::Final {
        return Err(AggregationError::Contract(format!("expected a final grid, got {:?}", fg.kind)));
    }
    fg.validate()?;
    cfg.validate()?;
    let lo = LoThreshold::from_f64(cfg.lo_threshold)?;
    let mut matched_rows = Vec::new();
    for (i, row) in fg.cells.iter().enumerate() {
        let (j, v) = row_best(row);
        if v >= cfg.sim_threshold {
            matched_rows.push(MatchedRow {
                receiving_id: fg.rows[i].clone(),
                sending_id: fg.cols[j].clone(),
                score: v,
            });
        }
    }
    let m = fg.rows.len();
    let k = matched_rows.len();
    Ok(CreditDecision {
        decision: if lo.is_met(k, m) { Verdict::Yes } else { Verdict::No },
        matched_count: k,
        receiving_count: m,
        match_fraction: k as f64 / m as f64,
        matched_rows,
        final_grid: fg.clone(),
    })
}

/// Percentage held in hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Percent(u32);

impl Percent {
    /// `100 * num / den` to two decimals, halves rounded up.
    pub fn from_ratio(num: usize, den: usize) -> Option<Percent> {
        if den == 0 || num > den {
            return None;
        }
        let (num, den) = (num as u64, den as u64);
        Some(Percent(((20_000 * num + den) / (2 * den)) as u32))
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub course_pair_id: String,
    pub human_decision: Verdict,
}

/// Read `course_pair_id,decision` rows. A first row whose id column is
/// literally `course_pair_id` is taken as a header.
pub fn read_annotations(reader: impl std::io::Read) -> Result<Vec<AnnotationRecord>, AggregationError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| AggregationError::Annotation {
            line: e.position().map_or(i + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        let err = |message: String| AggregationError::Annotation { line, message };
        if i == 0 && rec.get(0) == Some("course_pair_id") {
            continue;
        }
        if rec.len() != 2 {
            return Err(err(format!("expected 2 fields, found {}", rec.len())));
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(err("empty course_pair_id".into()));
        }
        let human_decision = rec[1].parse().map_err(err)?;
        if !seen.insert(id.clone()) {
            return Err(err(format!("duplicate course_pair_id '{}'", id)));
        }
        out.push(AnnotationRecord {
            course_pair_id: id,
            human_decision,
        });
    }
    if out.is_empty() {
        return Err(AggregationError::Annotation {
            line: 0,
            message: "no annotations".into(),
        });
    }
    Ok(out)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>, AggregationError> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| AggregationError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_annotations(f)
}

/// Share of course pairs where the model verdict equals the annotation.
/// Both sides must cover exactly the same pair ids.
pub fn agreement(decisions: &[(String, Verdict)], annotations: &[AnnotationRecord]) -> Result<Percent, AggregationError> {
    let mut model: HashMap<&str, Verdict> = HashMap::new();
    for (id, v) in decisions {
        if model.insert(id.as_str(), *v).is_some() {
            return Err(AggregationError::Contract(format!("two decisions for pair '{}'", id)));
        }
    }
    if model.len() != annotations.len() {
        return Err(AggregationError::Contract(format!(
            "{} decisions but {} annotations",
            model.len(),
            annotations.len()
        )));
    }
    let mut equal = 0;
    for a in annotations {
        let v = model
            .get(a.course_pair_id.as_str())
            .ok_or_else(|| AggregationError::Contract(format!("no decision for pair '{}'", a.course_pair_id)))?;
        if *v == a.human_decision {
            equal += 1;
        }
    }
    Percent::from_ratio(equal, annotations.len())
        .ok_or_else(|| AggregationError::Contract("no annotations".into()))
}
