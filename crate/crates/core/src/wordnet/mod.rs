//! Princeton WordNet verb taxonomy.
//!
//! The taxonomy is built from the `index.verb` / `data.verb` pair and keeps
//! only hypernym (`@`) edges. Verb hierarchies form a forest, so every
//! parentless synset is attached to a single synthetic root; this makes path
//! and depth queries total over all synset pairs.

mod morph;
mod parse;

pub use morph::{lemma_candidates, resolve_lemma};
pub use parse::{parse_wordnet, write_wordnet};

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Part of speech of a synset. Only verbs are loaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    #[serde(rename = "v")]
    Verb,
}

impl Pos {
    pub fn tag(self) -> char {
        match self {
            Pos::Verb => 'v',
        }
    }
}

/// Identifies a synset by its byte offset in the data file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SynsetId {
    pub offset: u32,
    pub pos: Pos,
}

impl SynsetId {
    /// Offset reserved for the synthetic root. Real offsets are at most eight
    /// decimal digits, so this never collides.
    pub const VIRTUAL_ROOT_OFFSET: u32 = u32::MAX;

    pub fn verb(offset: u32) -> Self {
        SynsetId { offset, pos: Pos::Verb }
    }

    pub fn is_virtual_root(&self) -> bool {
        self.offset == Self::VIRTUAL_ROOT_OFFSET
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_virtual_root() {
            write!(f, "*root*-{}", self.pos.tag())
        } else {
            write!(f, "{:08}-{}", self.offset, self.pos.tag())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Synset {
    pub id: SynsetId,
    pub lemmas: Vec<String>,
    /// Direct hypernyms in file order; never contains `id` and never the
    /// virtual root.
    pub hypernyms: Vec<SynsetId>,
    pub gloss: String,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WordNetError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("unknown synset {0}")]
    UnknownSynset(SynsetId),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Least common subsumer of two synsets together with the depths used by
/// the Wu-Palmer measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LcsInfo {
    pub lcs: SynsetId,
    pub depth_lcs: u32,
    pub depth_a: u32,
    pub depth_b: u32,
}

#[derive(Debug, Clone)]
struct Node {
    synset: Synset,
    // Parent node indices. Roots point at node 0 (the virtual root).
    parents: Vec<usize>,
    children: Vec<usize>,
    depth: u32,
}

/// Immutable hypernym graph of verb synsets.
#[derive(Debug, Clone)]
pub struct VerbTaxonomy {
    // nodes[0] is the virtual root.
    nodes: Vec<Node>,
    by_offset: HashMap<u32, usize>,
    lemma_index: HashMap<String, Vec<SynsetId>>,
    // Lemmas in index-file order, kept for serialization.
    lemma_order: Vec<String>,
    max_depth: u32,
}

impl VerbTaxonomy {
    /// Build from already-parsed synsets and the lemma index. Synsets may be
    /// in any order; hypernym targets must all be present.
    pub(crate) fn build(
        synsets: Vec<Synset>,
        lemma_entries: Vec<(String, Vec<SynsetId>)>,
    ) -> Result<Self, WordNetError> {
        if synsets.is_empty() {
            return Err(WordNetError::Integrity("no synsets".into()));
        }
        let root = Synset {
            id: SynsetId::verb(SynsetId::VIRTUAL_ROOT_OFFSET),
            lemmas: vec![],
            hypernyms: vec![],
            gloss: String::new(),
        };
        let mut nodes = Vec::with_capacity(synsets.len() + 1);
        nodes.push(Node {
            synset: root,
            parents: vec![],
            children: vec![],
            depth: 0,
        });
        let mut by_offset = HashMap::with_capacity(synsets.len());
        for s in synsets {
            if s.id.is_virtual_root() {
                return Err(WordNetError::Integrity(format!(
                    "offset {} is reserved",
                    s.id.offset
                )));
            }
            if by_offset.insert(s.id.offset, nodes.len()).is_some() {
                return Err(WordNetError::Integrity(format!("duplicate synset {}", s.id)));
            }
            nodes.push(Node {
                synset: s,
                parents: vec![],
                children: vec![],
                depth: 0,
            });
        }

        for i in 1..nodes.len() {
            let mut parents = Vec::new();
            for h in &nodes[i].synset.hypernyms {
                if *h == nodes[i].synset.id {
                    return Err(WordNetError::Integrity(format!(
                        "synset {} lists itself as hypernym",
                        h
                    )));
                }
                let p = *by_offset.get(&h.offset).ok_or_else(|| {
                    WordNetError::Integrity(format!(
                        "dangling hypernym {} referenced by {}",
                        h, nodes[i].synset.id
                    ))
                })?;
                if !parents.contains(&p) {
                    parents.push(p);
                }
            }
            if parents.is_empty() {
                parents.push(0);
            }
            nodes[i].parents = parents;
        }
        for i in 1..nodes.len() {
            for p in nodes[i].parents.clone() {
                nodes[p].children.push(i);
            }
        }

        // Minimum depth by BFS down from the root; anything unreached sits on
        // a hypernym cycle.
        let mut depth = vec![u32::MAX; nodes.len()];
        depth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(n) = queue.pop_front() {
            for &c in &nodes[n].children {
                if depth[c] == u32::MAX {
                    depth[c] = depth[n] + 1;
                    queue.push_back(c);
                }
            }
        }
        if let Some(i) = depth.iter().position(|&d| d == u32::MAX) {
            return Err(WordNetError::Integrity(format!(
                "hypernym cycle through {}",
                nodes[i].synset.id
            )));
        }
        check_acyclic(&nodes)?;
        let mut max_depth = 0;
        for (n, d) in nodes.iter_mut().zip(depth) {
            n.depth = d;
            max_depth = max_depth.max(d);
        }

        let mut lemma_index = HashMap::with_capacity(lemma_entries.len());
        let mut lemma_order = Vec::with_capacity(lemma_entries.len());
        for (lemma, ids) in lemma_entries {
            for id in &ids {
                if !by_offset.contains_key(&id.offset) {
                    return Err(WordNetError::Integrity(format!(
                        "index entry '{}' points at missing synset {}",
                        lemma, id
                    )));
                }
            }
            if lemma_index.insert(lemma.clone(), ids).is_some() {
                return Err(WordNetError::Integrity(format!("duplicate index entry '{}'", lemma)));
            }
            lemma_order.push(lemma);
        }

        Ok(VerbTaxonomy {
            nodes,
            by_offset,
            lemma_index,
            lemma_order,
            max_depth,
        })
    }

    /// Load `index.verb` and `data.verb` from a WordNet `dict` directory.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, WordNetError> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read(&path).map_err(|e| WordNetError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        };
        let index = read("index.verb")?;
        let data = read("data.verb")?;
        parse_wordnet(&index, &data)
    }

    pub fn virtual_root(&self) -> SynsetId {
        self.nodes[0].synset.id
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Number of real synsets (the virtual root excluded).
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Senses of a lemma in database order. The lemma must already be
    /// lowercased and normalized; unknown lemmas give an empty slice.
    pub fn synsets_of(&self, lemma: &str) -> &[SynsetId] {
        self.lemma_index.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        self.lemma_index.contains_key(lemma)
    }

    /// Lemmas in index-file order.
    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.lemma_order.iter().map(String::as_str)
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.index_of(id).ok().map(|i| &self.nodes[i].synset)
    }

    /// All real synsets, in offset order.
    pub fn synsets(&self) -> Vec<&Synset> {
        let mut v: Vec<&Synset> = self.nodes[1..].iter().map(|n| &n.synset).collect();
        v.sort_by_key(|s| s.id.offset);
        v
    }

    fn index_of(&self, id: SynsetId) -> Result<usize, WordNetError> {
        if id.is_virtual_root() {
            return Ok(0);
        }
        self.by_offset
            .get(&id.offset)
            .copied()
            .ok_or(WordNetError::UnknownSynset(id))
    }

    /// Edges from the virtual root along the shortest hypernym chain.
    pub fn depth(&self, id: SynsetId) -> Result<u32, WordNetError> {
        Ok(self.nodes[self.index_of(id)?].depth)
    }

    /// Ancestors of a node (itself included) with their depths.
    fn ancestors(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            for &p in &self.nodes[n].parents {
                if !seen.contains(&p) {
                    seen.push(p);
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Minimum number of hypernym/hyponym edges between two synsets. The
    /// virtual root takes part in the walk, so disconnected trees are joined
    /// through it.
    pub fn shortest_path_len(&self, a: SynsetId, b: SynsetId) -> Result<u32, WordNetError> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        Ok(self.bfs_distances(ia, &[ib])[0])
    }

    /// Distances from `from` to each of `targets`, in target order. One
    /// breadth-first walk serves every target.
    pub fn path_lengths_from(
        &self,
        from: SynsetId,
        targets: &[SynsetId],
    ) -> Result<Vec<u32>, WordNetError> {
        let src = self.index_of(from)?;
        let idx = targets
            .iter()
            .map(|t| self.index_of(*t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.bfs_distances(src, &idx))
    }

    fn bfs_distances(&self, src: usize, targets: &[usize]) -> Vec<u32> {
        let mut out = vec![u32::MAX; targets.len()];
        let mut pending: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, &t) in targets.iter().enumerate() {
            if t == src {
                out[k] = 0;
            } else {
                pending.entry(t).or_default().push(k);
            }
        }
        if pending.is_empty() {
            return out;
        }
        let mut dist = vec![u32::MAX; self.nodes.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(n) = queue.pop_front() {
            let d = dist[n];
            let node = &self.nodes[n];
            for &m in node.parents.iter().chain(node.children.iter()) {
                if dist[m] != u32::MAX {
                    continue;
                }
                dist[m] = d + 1;
                if let Some(slots) = pending.remove(&m) {
                    for k in slots {
                        out[k] = d + 1;
                    }
                    if pending.is_empty() {
                        return out;
                    }
                }
                queue.push_back(m);
            }
        }
        // Every node reaches the virtual root, so the walk always finishes.
        unreachable!("taxonomy is connected through the virtual root")
    }

    /// Deepest common subsumer of `a` and `b` and the depths entering the
    /// Wu-Palmer formula.
    ///
    /// Candidates are common ancestors (each synset counts as its own
    /// ancestor) whose depth does not exceed `min(depth(a), depth(b))`. With
    /// multiple inheritance a shallow synset can have a deep ancestor; the
    /// bound keeps `depth(lcs) <= min(depth(a), depth(b))` on every pair.
    /// Ties between equally deep candidates go to the lowest offset.
    pub fn lcs_and_depths(&self, a: SynsetId, b: SynsetId) -> Result<LcsInfo, WordNetError> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        Ok(self.lcs_by_index(ia, &self.ancestors(ia), ib, &self.ancestors(ib)))
    }

    fn lcs_by_index(&self, ia: usize, anc_a: &[usize], ib: usize, anc_b: &[usize]) -> LcsInfo {
        let depth_a = self.nodes[ia].depth;
        let depth_b = self.nodes[ib].depth;
        let bound = depth_a.min(depth_b);
        let mut best = 0usize;
        for &c in anc_a {
            if !anc_b.contains(&c) {
                continue;
            }
            let dc = self.nodes[c].depth;
            if dc > bound {
                continue;
            }
            let db = self.nodes[best].depth;
            let better = dc > db
                || (dc == db
                    && self.nodes[c].synset.id.offset < self.nodes[best].synset.id.offset);
            if better {
                best = c;
            }
        }
        LcsInfo {
            lcs: self.nodes[best].synset.id,
            depth_lcs: self.nodes[best].depth,
            depth_a,
            depth_b,
        }
    }

    /// Precomputed ancestor set for repeated LCS queries against one synset.
    pub fn ancestry(&self, id: SynsetId) -> Result<Ancestry, WordNetError> {
        let i = self.index_of(id)?;
        Ok(Ancestry {
            node: i,
            ancestors: self.ancestors(i),
        })
    }

    pub fn lcs_of(&self, a: &Ancestry, b: &Ancestry) -> LcsInfo {
        self.lcs_by_index(a.node, &a.ancestors, b.node, &b.ancestors)
    }

    /// Stable text rendering of the whole graph, one synset per line in
    /// offset order followed by the lemma index in file order.
    pub fn canonical_dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("max_depth {}\n", self.max_depth));
        for s in self.synsets() {
            let hyps: Vec<String> = s.hypernyms.iter().map(|h| h.to_string()).collect();
            out.push_str(&format!(
                "{} d={} [{}] -> [{}] | {}\n",
                s.id,
                self.depth(s.id).unwrap_or_default(),
                s.lemmas.join(","),
                hyps.join(","),
                s.gloss
            ));
        }
        for lemma in &self.lemma_order {
            let ids: Vec<String> = self.lemma_index[lemma].iter().map(|i| i.to_string()).collect();
            out.push_str(&format!("{} => {}\n", lemma, ids.join(" ")));
        }
        out
    }
}

/// A synset's ancestor closure, reusable across many LCS queries.
#[derive(Debug, Clone)]
pub struct Ancestry {
    node: usize,
    ancestors: Vec<usize>,
}

fn check_acyclic(nodes: &[Node]) -> Result<(), WordNetError> {
    // Kahn's algorithm over parent -> child edges.
    let mut indegree: Vec<usize> = nodes.iter().map(|n| n.parents.len()).collect();
    let mut queue: VecDeque<usize> = (0..nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let mut visited = 0;
    while let Some(n) = queue.pop_front() {
        visited += 1;
        for &c in &nodes[n].children {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if visited != nodes.len() {
        let stuck = (0..nodes.len()).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(WordNetError::Integrity(format!(
            "hypernym cycle through {}",
            nodes[stuck].synset.id
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    // move <- travel <- run, plus a second tree: think <- analyze
    fn chain() -> VerbTaxonomy {
        let s = |o: u32, lemmas: &[&str], hyp: &[u32]| Synset {
            id: SynsetId::verb(o),
            lemmas: lemmas.iter().map(|l| l.to_string()).collect(),
            hypernyms: hyp.iter().map(|&h| SynsetId::verb(h)).collect(),
            gloss: String::new(),
        };
        VerbTaxonomy::build(
            vec![
                s(100, &["move"], &[]),
                s(200, &["travel"], &[100]),
                s(300, &["run"], &[200]),
                s(400, &["walk"], &[200]),
                s(500, &["think"], &[]),
            ],
            vec![
                ("move".into(), vec![SynsetId::verb(100)]),
                ("run".into(), vec![SynsetId::verb(300)]),
                ("think".into(), vec![SynsetId::verb(500)]),
                ("travel".into(), vec![SynsetId::verb(200)]),
                ("walk".into(), vec![SynsetId::verb(400)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn depths_count_the_root_edge() {
        let t = chain();
        assert_eq!(t.max_depth(), 3);
        assert_eq!(t.depth(SynsetId::verb(100)).unwrap(), 1);
        assert_eq!(t.depth(SynsetId::verb(300)).unwrap(), 3);
        assert_eq!(t.depth(t.virtual_root()).unwrap(), 0);
    }

    #[test]
    fn path_lengths() {
        let t = chain();
        let v = SynsetId::verb;
        assert_eq!(t.shortest_path_len(v(300), v(300)).unwrap(), 0);
        assert_eq!(t.shortest_path_len(v(300), v(100)).unwrap(), 2);
        assert_eq!(t.shortest_path_len(v(300), v(400)).unwrap(), 2);
        // roots only meet at the virtual root
        assert_eq!(t.shortest_path_len(v(100), v(500)).unwrap(), 2);
        assert_eq!(t.shortest_path_len(v(300), v(500)).unwrap(), 4);
        assert_eq!(
            t.path_lengths_from(v(300), &[v(300), v(400), v(500)]).unwrap(),
            vec![0, 2, 4]
        );
    }

    #[test]
    fn lcs_queries() {
        let t = chain();
        let v = SynsetId::verb;
        let l = t.lcs_and_depths(v(300), v(400)).unwrap();
        assert_eq!(l.lcs, v(200));
        assert_eq!((l.depth_lcs, l.depth_a, l.depth_b), (2, 3, 3));
        let same = t.lcs_and_depths(v(300), v(300)).unwrap();
        assert_eq!(same.lcs, v(300));
        let apart = t.lcs_and_depths(v(300), v(500)).unwrap();
        assert_eq!(apart.lcs, t.virtual_root());
        assert_eq!(apart.depth_lcs, 0);
    }

    #[test]
    fn unknown_ids_are_lookup_errors() {
        let t = chain();
        let bad = SynsetId::verb(999);
        assert_eq!(
            t.shortest_path_len(bad, SynsetId::verb(100)),
            Err(WordNetError::UnknownSynset(bad))
        );
        assert!(t.lcs_and_depths(SynsetId::verb(100), bad).is_err());
    }

    #[test]
    fn lookup_by_lemma() {
        let t = chain();
        assert_eq!(t.synsets_of("run"), &[SynsetId::verb(300)]);
        assert!(t.synsets_of("zzzz").is_empty());
    }

    #[test]
    fn dangling_and_self_hypernyms_rejected() {
        let s = |o: u32, hyp: &[u32]| Synset {
            id: SynsetId::verb(o),
            lemmas: vec!["x".into()],
            hypernyms: hyp.iter().map(|&h| SynsetId::verb(h)).collect(),
            gloss: String::new(),
        };
        let e = VerbTaxonomy::build(vec![s(1, &[7])], vec![]).unwrap_err();
        assert!(matches!(e, WordNetError::Integrity(m) if m.contains("dangling")));
        let e = VerbTaxonomy::build(vec![s(1, &[1])], vec![]).unwrap_err();
        assert!(matches!(e, WordNetError::Integrity(_)));
        let e = VerbTaxonomy::build(vec![s(1, &[2]), s(2, &[1])], vec![]).unwrap_err();
        assert!(matches!(e, WordNetError::Integrity(m) if m.contains("cycle")));
    }
}
