//! Exhaustive silhouette assignment and the 20-verb fixture set.

use tca_core::bloom::{assign_verb, AssignMethod, BloomCluster, BloomClusterSet};
use tca_core::wordnet::VerbTaxonomy;

use super::{load_fixture, Oracle};

/// Straight from the silhouette definition, over 1 - max-sense Wu-Palmer.
pub fn oracle_assign(verb: &str, seeds: &[Vec<String>], tax: &VerbTaxonomy, o: &Oracle) -> (u8, Vec<Option<f64>>) {
    let vs = tax.synsets_of(verb);
    assert!(!vs.is_empty());
    let mut a = Vec::new();
    for cluster in seeds {
        let mut total = 0.0;
        let mut count = 0;
        for seed in cluster {
            let ss = tax.synsets_of(seed);
            if ss.is_empty() {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for x in vs {
                for y in ss {
                    best = best.max(o.wup(x.offset, y.offset));
                }
            }
            total += 1.0 - best;
            count += 1;
        }
        a.push(if count == 0 { None } else { Some(total / count as f64) });
    }
    let mut scores = Vec::new();
    for k in 0..seeds.len() {
        match a[k] {
            None => scores.push(None),
            Some(ak) => {
                let mut b: Option<f64> = None;
                for j in 0..seeds.len() {
                    if j != k {
                        if let Some(aj) = a[j] {
                            b = Some(match b {
                                None => aj,
                                Some(x) if aj < x => aj,
                                Some(x) => x,
                            });
                        }
                    }
                }
                let s = match b {
                    None => 0.0,
                    Some(b) => {
                        let m = if ak > b { ak } else { b };
                        if m == 0.0 {
                            0.0
                        } else {
                            (b - ak) / m
                        }
                    }
                };
                scores.push(Some(s));
            }
        }
    }
    let mut level = 0;
    let mut best = f64::NEG_INFINITY;
    for (k, s) in scores.iter().enumerate() {
        if let Some(s) = s {
            if *s > best {
                best = *s;
                level = k as u8 + 1;
            }
        }
    }
    (level, scores)
}

pub fn fixture_clusters() -> (BloomClusterSet, Vec<Vec<String>>) {
    let seeds: Vec<Vec<&str>> = vec![
        vec!["aa", "aone", "deepa"],
        vec!["atwo", "atwoone", "aonetwo", "athree"],
        vec!["bb", "bone", "deepb", "boneone"],
        vec!["btwo", "btwoone", "deepc", "bthree"],
        vec!["cc", "cone", "coneone", "chainone", "shortcut"],
        vec!["lone", "loneone", "nosuchverb"],
    ];
    let clusters = seeds
        .iter()
        .enumerate()
        .map(|(i, s)| BloomCluster {
            level: i as u8 + 1,
            name: format!("L{}", i + 1),
            seed_verbs: s.iter().map(|v| v.to_string()).collect(),
        })
        .collect();
    let owned = seeds.iter().map(|s| s.iter().map(|v| v.to_string()).collect()).collect();
    (BloomClusterSet::new(clusters).unwrap(), owned)
}

pub const FIXTURE_VERBS: [&str; 20] = [
    "aoneone", "mixa", "deepd", "fourpar", "mixb", "chaintwo", "chainthree", "tail", "tailtwo", "under", "lonetwo",
    "lonedeep", "bthreeone", "bthreetwo", "bleaf", "athreeone", "aleaf", "ex", "why", "zed",
];

/// Verbs whose level or silhouette scores differ from the oracle.
pub fn fixture_mismatches() -> Vec<String> {
    let tax = load_fixture("dag");
    let o = Oracle::new(&tax);
    let (set, seeds) = fixture_clusters();
    let mut bad = Vec::new();
    for v in FIXTURE_VERBS {
        let got = match assign_verb(v, &set, &tax) {
            Ok(a) => a,
            Err(e) => {
                bad.push(format!("{}: {}", v, e));
                continue;
            }
        };
        let (level, scores) = oracle_assign(v, &seeds, &tax, &o);
        let gs = got.silhouette_scores.unwrap_or_default();
        let same_scores = gs.len() == scores.len()
            && gs.iter().zip(&scores).all(|(g, e)| match (g, e) {
                (Some(g), Some(e)) => (g - e).abs() < 1e-12,
                (None, None) => true,
                _ => false,
            });
        if got.method != AssignMethod::Silhouette || got.level != level || !same_scores {
            bad.push(format!("{}: level {} vs oracle {}", v, got.level, level));
        }
    }
    bad
}
