//! Knowledge-based verb similarity over the WordNet verb taxonomy.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::wordnet::{resolve_lemma, Ancestry, SynsetId, VerbTaxonomy, WordNetError};
use crate::wordvec::WordVectors;

/// `1 / (1 + min_len)`.
pub fn sim_path(tax: &VerbTaxonomy, t1: SynsetId, t2: SynsetId) -> Result<f64, WordNetError> {
    Ok(path_from_len(tax.shortest_path_len(t1, t2)?))
}

/// `2 depth(lcs) / (depth(t1) + depth(t2))`, 0 when both depths are 0.
pub fn sim_wup(tax: &VerbTaxonomy, t1: SynsetId, t2: SynsetId) -> Result<f64, WordNetError> {
    let l = tax.lcs_and_depths(t1, t2)?;
    Ok(wup_from_depths(l.depth_lcs, l.depth_a, l.depth_b))
}

/// `-ln(min_len / (2 max_depth))` with `min_len` clamped to at least 1.
pub fn sim_lch(tax: &VerbTaxonomy, t1: SynsetId, t2: SynsetId) -> Result<f64, WordNetError> {
    Ok(lch_from_len(tax.shortest_path_len(t1, t2)?, tax.max_depth()))
}

fn path_from_len(len: u32) -> f64 {
    1.0 / (1.0 + len as f64)
}

fn wup_from_depths(lcs: u32, a: u32, b: u32) -> f64 {
    if a + b == 0 {
        return 0.0;
    }
    2.0 * lcs as f64 / (a + b) as f64
}

fn lch_from_len(len: u32, max_depth: u32) -> f64 {
    let len = len.max(1) as f64;
    -(len / (2.0 * max_depth as f64)).ln()
}

/// The graph measures: path, Wu-Palmer, Leacock-Chodorow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMeasure {
    Path,
    Wup,
    Lch,
}

/// How a verb pair is reduced to a synset pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SenseSelection {
    /// Pair the first listed sense of each verb.
    First,
    /// Maximum over all sense pairs.
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureId {
    Graph(GraphMeasure, SenseSelection),
    /// Cosine between word vectors from a named vector set.
    Vector(String),
}

impl MeasureId {
    pub const PATH: MeasureId = MeasureId::Graph(GraphMeasure::Path, SenseSelection::First);
    pub const WUP: MeasureId = MeasureId::Graph(GraphMeasure::Wup, SenseSelection::First);
    pub const LCH: MeasureId = MeasureId::Graph(GraphMeasure::Lch, SenseSelection::First);
    pub const PATH_MAX: MeasureId = MeasureId::Graph(GraphMeasure::Path, SenseSelection::Max);
    pub const WUP_MAX: MeasureId = MeasureId::Graph(GraphMeasure::Wup, SenseSelection::Max);
    pub const LCH_MAX: MeasureId = MeasureId::Graph(GraphMeasure::Lch, SenseSelection::Max);

    /// The six knowledge-based measures.
    pub fn knowledge_based() -> Vec<MeasureId> {
        vec![
            Self::WUP,
            Self::PATH,
            Self::LCH,
            Self::WUP_MAX,
            Self::PATH_MAX,
            Self::LCH_MAX,
        ]
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureId::Graph(m, sel) => {
                let base = match m {
                    GraphMeasure::Path => "path",
                    GraphMeasure::Wup => "wup",
                    GraphMeasure::Lch => "lch",
                };
                match sel {
                    SenseSelection::First => f.write_str(base),
                    SenseSelection::Max => write!(f, "{}_max", base),
                }
            }
            MeasureId::Vector(name) => write!(f, "vector:{}", name),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown measure '{0}' (expected path, wup, lch, *_max or vector:<name>)")]
pub struct UnknownMeasure(pub String);

impl FromStr for MeasureId {
    type Err = UnknownMeasure;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use GraphMeasure::*;
        use SenseSelection::*;
        let s = s.trim();
        if let Some(name) = s.strip_prefix("vector:") {
            if name.is_empty() {
                return Err(UnknownMeasure(s.to_string()));
            }
            return Ok(MeasureId::Vector(name.to_string()));
        }
        let m = match s {
            "path" => MeasureId::Graph(Path, First),
            "wup" => MeasureId::Graph(Wup, First),
            "lch" => MeasureId::Graph(Lch, First),
            "path_max" => MeasureId::Graph(Path, Max),
            "wup_max" => MeasureId::Graph(Wup, Max),
            "lch_max" => MeasureId::Graph(Lch, Max),
            _ => return Err(UnknownMeasure(s.to_string())),
        };
        Ok(m)
    }
}

impl Serialize for MeasureId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MeasureId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All six graph scores of one verb pair; `None` means unscorable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GraphScores {
    pub path: Option<f64>,
    pub wup: Option<f64>,
    pub lch: Option<f64>,
    pub path_max: Option<f64>,
    pub wup_max: Option<f64>,
    pub lch_max: Option<f64>,
}

impl GraphScores {
    pub fn get(&self, m: GraphMeasure, sel: SenseSelection) -> Option<f64> {
        match (m, sel) {
            (GraphMeasure::Path, SenseSelection::First) => self.path,
            (GraphMeasure::Wup, SenseSelection::First) => self.wup,
            (GraphMeasure::Lch, SenseSelection::First) => self.lch,
            (GraphMeasure::Path, SenseSelection::Max) => self.path_max,
            (GraphMeasure::Wup, SenseSelection::Max) => self.wup_max,
            (GraphMeasure::Lch, SenseSelection::Max) => self.lch_max,
        }
    }
}

/// Scores verb pairs under any [`MeasureId`].
///
/// Lemmas are lowercased and run through the suffix lemmatizer before lookup.
pub struct VerbScorer<'a> {
    tax: &'a VerbTaxonomy,
    vectors: BTreeMap<String, WordVectors>,
}

impl<'a> VerbScorer<'a> {
    pub fn new(tax: &'a VerbTaxonomy) -> Self {
        VerbScorer {
            tax,
            vectors: BTreeMap::new(),
        }
    }

    pub fn with_vectors(mut self, name: impl Into<String>, vectors: WordVectors) -> Self {
        self.vectors.insert(name.into(), vectors);
        self
    }

    pub fn taxonomy(&self) -> &VerbTaxonomy {
        self.tax
    }

    fn senses(&self, lemma: &str) -> &'a [SynsetId] {
        match resolve_lemma(self.tax, lemma) {
            Some(l) => self.tax.synsets_of(&l),
            None => &[],
        }
    }

    /// Score one pair, or `None` when either lemma is unknown.
    pub fn verb_sim(&self, measure: &MeasureId, v1: &str, v2: &str) -> Option<f64> {
        match measure {
            MeasureId::Graph(m, sel) => self.graph_scores(v1, v2).get(*m, *sel),
            MeasureId::Vector(name) => {
                let vs = self.vectors.get(name)?;
                vs.similarity(&v1.to_lowercase(), &v2.to_lowercase())
            }
        }
    }

    /// All six graph measures at once, sharing the graph walks.
    pub fn graph_scores(&self, v1: &str, v2: &str) -> GraphScores {
        let s1 = self.senses(v1);
        let s2 = self.senses(v2);
        if s1.is_empty() || s2.is_empty() {
            return GraphScores::default();
        }
        let tax = self.tax;
        let max_depth = tax.max_depth();
        let anc2: Vec<Ancestry> = s2
            .iter()
            .map(|s| tax.ancestry(*s).expect("indexed synset"))
            .collect();

        let mut out = GraphScores::default();
        let mut path_max = f64::NEG_INFINITY;
        let mut wup_max = f64::NEG_INFINITY;
        let mut lch_max = f64::NEG_INFINITY;
        for (i, a) in s1.iter().enumerate() {
            let anc1 = tax.ancestry(*a).expect("indexed synset");
            let lens = tax.path_lengths_from(*a, s2).expect("indexed synset");
            for (j, len) in lens.iter().enumerate() {
                let l = tax.lcs_of(&anc1, &anc2[j]);
                let path = path_from_len(*len);
                let wup = wup_from_depths(l.depth_lcs, l.depth_a, l.depth_b);
                let lch = lch_from_len(*len, max_depth);
                if i == 0 && j == 0 {
                    out.path = Some(path);
                    out.wup = Some(wup);
                    out.lch = Some(lch);
                }
                path_max = path_max.max(path);
                wup_max = wup_max.max(wup);
                lch_max = lch_max.max(lch);
            }
        }
        out.path_max = Some(path_max);
        out.wup_max = Some(wup_max);
        out.lch_max = Some(lch_max);
        out
    }

    /// Maximum Wu-Palmer similarity over all sense pairs.
    pub fn wup_max(&self, v1: &str, v2: &str) -> Option<f64> {
        wup_max_over(self.tax, self.senses(v1), self.senses(v2))
    }
}

/// Maximum Wu-Palmer similarity over every pair drawn from two sense lists;
/// `None` when either list is empty. Skips the path walks `graph_scores`
/// needs.
pub fn wup_max_over(tax: &VerbTaxonomy, s1: &[SynsetId], s2: &[SynsetId]) -> Option<f64> {
    if s1.is_empty() || s2.is_empty() {
        return None;
    }
    let anc1: Vec<Ancestry> = s1.iter().filter_map(|s| tax.ancestry(*s).ok()).collect();
    let anc2: Vec<Ancestry> = s2.iter().filter_map(|s| tax.ancestry(*s).ok()).collect();
    let mut best: Option<f64> = None;
    for a in &anc1 {
        for b in &anc2 {
            let l = tax.lcs_of(a, b);
            let w = wup_from_depths(l.depth_lcs, l.depth_a, l.depth_b);
            best = Some(best.map_or(w, |x: f64| x.max(w)));
        }
    }
    best
}
