//! Shared helpers and brute-force oracles for the integration tests.
#![allow(dead_code)]

pub mod golden;
pub mod silhouette;

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::PathBuf;

use tca_core::wordnet::{parse_wordnet, SynsetId, VerbTaxonomy};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture_dir(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn load_fixture(name: &str) -> VerbTaxonomy {
    let dir = fixture_dir(&format!("wordnet/{}", name));
    let index = std::fs::read(dir.join("index.verb")).unwrap();
    let data = std::fs::read(dir.join("data.verb")).unwrap();
    parse_wordnet(&index, &data).unwrap()
}

pub fn real_wordnet() -> VerbTaxonomy {
    VerbTaxonomy::load_dir(repo_root().join("data/wordnet-3.0")).unwrap()
}

pub const ROOT: u32 = u32::MAX;

/// Graph oracle over the raw hypernym lists, with an explicit root node.
pub struct Oracle {
    parents: HashMap<u32, Vec<u32>>,
    adj: HashMap<u32, Vec<u32>>,
    depth: HashMap<u32, u32>,
    pub max_depth: u32,
}

impl Oracle {
    pub fn new(tax: &VerbTaxonomy) -> Oracle {
        let mut parents: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
        adj.insert(ROOT, vec![]);
        for s in tax.synsets() {
            let mut ps: Vec<u32> = s.hypernyms.iter().map(|h| h.offset).collect();
            if ps.is_empty() {
                ps.push(ROOT);
            }
            for p in &ps {
                adj.entry(*p).or_default().push(s.id.offset);
                adj.entry(s.id.offset).or_default().push(*p);
            }
            parents.insert(s.id.offset, ps);
        }
        // depth: BFS from the root along child edges
        let mut children: HashMap<u32, Vec<u32>> = HashMap::new();
        for (c, ps) in &parents {
            for p in ps {
                children.entry(*p).or_default().push(*c);
            }
        }
        let mut depth = HashMap::new();
        depth.insert(ROOT, 0);
        let mut q = VecDeque::from([ROOT]);
        while let Some(n) = q.pop_front() {
            let d = depth[&n];
            for c in children.get(&n).cloned().unwrap_or_default() {
                if !depth.contains_key(&c) {
                    depth.insert(c, d + 1);
                    q.push_back(c);
                }
            }
        }
        let max_depth = *depth.values().max().unwrap();
        Oracle {
            parents,
            adj,
            depth,
            max_depth,
        }
    }

    pub fn depth(&self, a: u32) -> u32 {
        self.depth[&a]
    }

    pub fn path_len(&self, a: u32, b: u32) -> u32 {
        let mut dist = HashMap::from([(a, 0u32)]);
        let mut q = VecDeque::from([a]);
        while let Some(n) = q.pop_front() {
            if n == b {
                return dist[&n];
            }
            for m in &self.adj[&n] {
                if !dist.contains_key(m) {
                    dist.insert(*m, dist[&n] + 1);
                    q.push_back(*m);
                }
            }
        }
        panic!("disconnected");
    }

    pub fn ancestors(&self, a: u32) -> HashSet<u32> {
        let mut seen = HashSet::from([a, ROOT]);
        let mut stack = vec![a];
        while let Some(n) = stack.pop() {
            for p in self.parents.get(&n).cloned().unwrap_or_default() {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Deepest common ancestor no deeper than either input; lowest offset
    /// among equally deep candidates.
    pub fn lcs(&self, a: u32, b: u32) -> (u32, u32) {
        let bound = self.depth(a).min(self.depth(b));
        let common: Vec<u32> = self
            .ancestors(a)
            .intersection(&self.ancestors(b))
            .copied()
            .filter(|c| self.depth(*c) <= bound)
            .collect();
        let best = common.iter().map(|c| self.depth(*c)).max().unwrap();
        let id = common.iter().filter(|c| self.depth(**c) == best).min().copied().unwrap();
        (id, best)
    }

    pub fn path(&self, a: u32, b: u32) -> f64 {
        1.0 / (1.0 + self.path_len(a, b) as f64)
    }

    pub fn wup(&self, a: u32, b: u32) -> f64 {
        let (_, d) = self.lcs(a, b);
        let s = self.depth(a) + self.depth(b);
        if s == 0 {
            0.0
        } else {
            2.0 * d as f64 / s as f64
        }
    }

    pub fn lch(&self, a: u32, b: u32) -> f64 {
        let len = self.path_len(a, b).max(1) as f64;
        -(len / (2.0 * self.max_depth as f64)).ln()
    }

    pub fn offsets(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.parents.keys().copied().collect();
        v.sort();
        v
    }
}

pub fn sid(o: u32) -> SynsetId {
    SynsetId::verb(o)
}

/// Render a random DAG (node i may only point at nodes below i) in the
/// WordNet text formats. Node i has offset `(i + 1) * 10` and lemma `w{i}`.
pub fn dag_files(parents: &[Vec<usize>]) -> (String, String) {
    let mut data = String::new();
    let mut index = String::new();
    for (i, ps) in parents.iter().enumerate() {
        let ptrs: Vec<String> = ps.iter().map(|p| format!("@ {:08} v 0000", (p + 1) * 10)).collect();
        data.push_str(&format!(
            "{:08} 29 v 01 w{} 0 {:03} {} 00 | node {}\n",
            (i + 1) * 10,
            i,
            ps.len(),
            ptrs.join(" "),
            i
        ));
        index.push_str(&format!("w{} v 1 0 1 0 {:08}\n", i, (i + 1) * 10));
    }
    (index, data)
}
