//! Comparison against the checked-in output of `tests/oracle/golden_oracle.py`.

use std::sync::Arc;

use serde_json::Value;
use tca_core::aggregation::{agreement, load_annotations, AssessmentConfig, Verdict};
use tca_core::bloom::{BloomClassifier, BloomClusterSet};
use tca_core::canonical::format_float;
use tca_core::course::PairManifest;
use tca_core::embedding::HashingProvider;
use tca_core::grid::SimilarityGrid;
use tca_core::pipeline::Assessor;

use super::{fixture_dir, real_wordnet};

macro_rules! ensure_eq {
    ($a:expr, $b:expr) => {
        ensure_eq!($a, $b, "mismatch")
    };
    ($a:expr, $b:expr, $($msg:tt)+) => {{
        let (a, b) = (&$a, &$b);
        if a != b {
            return Err(format!("{}: {:?} != {:?}", format!($($msg)+), a, b));
        }
    }};
}

pub fn expected() -> Value {
    let text = std::fs::read_to_string(fixture_dir("golden/expected.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn assessor() -> Assessor {
    let c = BloomClassifier::new(Arc::new(real_wordnet()), Arc::new(BloomClusterSet::default_set()));
    Assessor::new(Arc::new(c), Arc::new(HashingProvider::new()))
}

fn same_cells(pair: &str, what: &str, got: &SimilarityGrid, want: &Value) -> Result<(), String> {
    let want = want.as_array().unwrap();
    ensure_eq!(got.cells.len(), want.len(), "{} {}", pair, what);
    for (i, (g, w)) in got.cells.iter().zip(want).enumerate() {
        let w = w.as_array().unwrap();
        ensure_eq!(g.len(), w.len(), "{} {}", pair, what);
        for (j, (g, w)) in g.iter().zip(w).enumerate() {
            ensure_eq!(format_float(*g), format_float(w.as_f64().unwrap()), "{} {} ({}, {})", pair, what, i, j);
        }
    }
    Ok(())
}

/// Neutral-config assessments of every golden pair against the oracle file.
pub fn check_neutral() -> Result<(), String> {
    let exp = expected();
    let pairs = PairManifest::load_pairs(fixture_dir("golden/pairs.json")).unwrap();
    let a = assessor();
    let cfg = AssessmentConfig::NEUTRAL;
    let mut decisions = Vec::new();
    for (p, want) in pairs.iter().zip(exp["pairs"].as_array().unwrap()) {
        ensure_eq!(p.id, want["id"].as_str().unwrap());
        let got = a.assess_pair(&p.receiving, &p.sending, &cfg).map_err(|e| format!("{}: {}", p.id, e))?;
        let id = p.id.as_str();
        for (side, analysis) in [("receiving", &got.grids.receiving), ("sending", &got.grids.sending)] {
            let levels: Vec<Option<u64>> =
                analysis.learning_outcomes.iter().map(|lo| lo.level.map(u64::from)).collect();
            let want_levels: Vec<Option<u64>> =
                want[format!("{}_levels", side)].as_array().unwrap().iter().map(|v| v.as_u64()).collect();
            ensure_eq!(levels, want_levels, "{} {} levels", id, side);
            let verbs: Vec<Vec<String>> = analysis.learning_outcomes.iter().map(|lo| lo.verbs.clone()).collect();
            let want_verbs: Vec<Vec<String>> = serde_json::from_value(want[format!("{}_verbs", side)].clone()).unwrap();
            ensure_eq!(verbs, want_verbs, "{} {} verbs", id, side);
        }
        same_cells(id, "taxonomic", &got.grids.taxonomic_grid, &want["taxonomic_grid"])?;
        same_cells(id, "semantic", &got.grids.semantic_grid, &want["semantic_grid"])?;
        same_cells(id, "final", &got.decision.final_grid, &want["final_grid"])?;
        ensure_eq!(got.decision.decision.as_str(), want["decision"].as_str().unwrap(), "{}", id);
        ensure_eq!(
            format_float(got.decision.match_fraction),
            format_float(want["match_fraction"].as_f64().unwrap())
        );
        let rows = want["matched_rows"].as_array().unwrap();
        ensure_eq!(got.decision.matched_rows.len(), rows.len(), "{}", id);
        for (g, w) in got.decision.matched_rows.iter().zip(rows) {
            ensure_eq!(g.receiving_id, w["receiving_id"].as_str().unwrap());
            ensure_eq!(g.sending_id, w["sending_id"].as_str().unwrap());
            ensure_eq!(format_float(g.score), format_float(w["score"].as_f64().unwrap()));
        }
        decisions.push((p.id.clone(), got.decision.decision));
    }
    let ann = load_annotations(fixture_dir("golden/annotations.csv")).unwrap();
    ensure_eq!(agreement(&decisions, &ann).unwrap().to_string(), exp["agreement"].as_str().unwrap());
    Ok(())
}

/// Parameter sweeps and their agreement percentages against the oracle file.
pub fn check_sweeps() -> Result<(), String> {
    let exp = expected();
    let pairs = PairManifest::load_pairs(fixture_dir("golden/pairs.json")).unwrap();
    let ann = load_annotations(fixture_dir("golden/annotations.csv")).unwrap();
    let a = assessor();
    for param in ["impact", "sim_threshold", "lo_threshold"] {
        let sweep = &exp["sweeps"][param];
        let settings: Vec<AssessmentConfig> = sweep["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| {
                let mut c = AssessmentConfig::NEUTRAL;
                let v = v.as_f64().unwrap();
                match param {
                    "impact" => c.impact = v,
                    "sim_threshold" => c.sim_threshold = v,
                    _ => c.lo_threshold = v,
                }
                c
            })
            .collect();
        let report = a.sweep(&pairs, &settings, Some(&ann)).unwrap();
        for row in &report.rows {
            let want: Vec<Verdict> = serde_json::from_value(sweep["decisions"][&row.pair_id].clone()).unwrap();
            ensure_eq!(row.decisions, want, "{} {}", param, row.pair_id);
        }
        let got: Vec<String> = report.agreement.unwrap().iter().map(|p| p.to_string()).collect();
        let want: Vec<String> = serde_json::from_value(sweep["agreement"].clone()).unwrap();
        ensure_eq!(got, want, "{}", param);
    }
    Ok(())
}
