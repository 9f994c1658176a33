//! Local influence projection and academic-influence propagation.
//!
//! A reference's class and rank inside the citing paper give its signed
//! local influence `IF ∈ [-1, 1]`. Over the citation graph each paper's
//! academic influence solves
//!
//! ```text
//! AF_A = 1 + d · Σ_{j cites A} AF_j · IF_jA
//! ```
//!
//! and an author's influence is the share-weighted sum of the AF of their
//! papers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifier::ContributionClass;
use crate::error::{Error, Result};
use crate::ranker::{rank_references, ReferenceRows, ReferenceScorer};

/// `(lower, upper)` local-influence band of each class, indexed by class code.
pub const CLASS_BANDS: [(f64, f64); 4] = [(-1.0, -0.25), (0.05, 0.35), (0.35, 0.65), (0.65, 1.0)];

/// Interpolates inside the class band: rank 1 maps to the upper end, rank R
/// to the lower end; a lone reference gets the upper end.
pub fn local_influence(class: ContributionClass, rank: usize, total: usize) -> Result<f64> {
    if total < 1 || rank < 1 || rank > total {
        return Err(Error::invalid(format!("rank {rank} outside 1..={total}")));
    }
    let w = if total > 1 { (total - rank) as f64 / (total - 1) as f64 } else { 1.0 };
    let (lo, hi) = CLASS_BANDS[class.code() as usize];
    Ok(lo + (hi - lo) * w)
}

/// Local influence of one reference on one citing paper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalInfluence {
    pub citing_paper_id: String,
    pub cit_id: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub citing: usize,
    pub cited: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorShare {
    pub paper: usize,
    pub share: f64,
}

/// Citation graph with local-influence edges and author credit shares.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InfluenceGraph {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: Vec<Edge>,
    /// Incoming edges per node as `(citing, IF)`, ordered by citing index.
    incoming: Vec<Vec<(usize, f64)>>,
    authors: BTreeMap<String, Vec<AuthorShare>>,
}

impl InfluenceGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a paper with its authors' credit shares, which must sum to 1
    /// (an empty author list is allowed).
    pub fn add_paper(&mut self, paper_id: &str, authors: &[(String, f64)]) -> Result<usize> {
        if paper_id.is_empty() || paper_id.contains(char::is_whitespace) {
            return Err(Error::invalid(format!("bad paper id {paper_id:?}")));
        }
        if self.index.contains_key(paper_id) {
            return Err(Error::invalid(format!("paper {paper_id} added twice")));
        }
        if !authors.is_empty() {
            let total: f64 = authors.iter().map(|(_, s)| s).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("author shares of {paper_id} sum to {total}, expected 1")));
            }
        }
        if let Some((name, s)) = authors.iter().find(|(_, s)| !(0.0..=1.0).contains(s)) {
            return Err(Error::invalid(format!("share {s} of {name} outside [0,1]")));
        }
        let id = self.nodes.len();
        self.nodes.push(paper_id.to_string());
        self.index.insert(paper_id.to_string(), id);
        self.incoming.push(Vec::new());
        for (name, share) in authors {
            if name.is_empty() || name.contains(['\t', '\n']) {
                return Err(Error::invalid(format!("bad author name {name:?}")));
            }
            self.authors.entry(name.clone()).or_default().push(AuthorShare { paper: id, share: *share });
        }
        Ok(id)
    }

    /// Adds the edge `citing → cited` carrying `cited`'s local influence on
    /// `citing`.
    pub fn add_edge(&mut self, citing: &str, cited: &str, value: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!("edge {citing}->{cited}: IF {value} outside [-1,1]")));
        }
        let c = self.node(citing)?;
        let a = self.node(cited)?;
        if c == a {
            return Err(Error::invalid(format!("self-citation edge on {citing}")));
        }
        if self.incoming[a].iter().any(|(j, _)| *j == c) {
            return Err(Error::invalid(format!("duplicate edge {citing}->{cited}")));
        }
        self.edges.push(Edge { citing: c, cited: a, value });
        let pos = self.incoming[a].partition_point(|(j, _)| *j < c);
        self.incoming[a].insert(pos, (c, value));
        Ok(())
    }

    /// Registers an author without papers.
    pub fn add_author(&mut self, name: &str) {
        self.authors.entry(name.to_string()).or_default();
    }

    pub fn node(&self, paper_id: &str) -> Result<usize> {
        self.index.get(paper_id).copied().ok_or_else(|| Error::NotFound(format!("paper {paper_id}")))
    }

    pub fn paper_ids(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn incoming(&self, node: usize) -> &[(usize, f64)] {
        &self.incoming[node]
    }

    pub fn authors(&self) -> &BTreeMap<String, Vec<AuthorShare>> {
        &self.authors
    }

    /// Author credit shares of one paper, by author name.
    pub fn paper_authors(&self, node: usize) -> Vec<(&str, f64)> {
        self.authors
            .iter()
            .flat_map(|(name, list)| {
                list.iter().filter(move |s| s.paper == node).map(move |s| (name.as_str(), s.share))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# citation influence graph v1\n[nodes]\n");
        for n in &self.nodes {
            let _ = writeln!(out, "{n}");
        }
        out.push_str("[edges]\n");
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", self.nodes[e.citing], self.nodes[e.cited], e.value);
        }
        out.push_str("[authors]\n");
        for (name, list) in &self.authors {
            if list.is_empty() {
                let _ = writeln!(out, "-\t-\t{name}");
            }
            for s in list {
                let _ = writeln!(out, "{}\t{}\t{name}", self.nodes[s.paper], s.share);
            }
        }
        out
    }

    /// Parses the graph file written by [`InfluenceGraph::to_text`]:
    /// `[nodes]` one paper id per line, `[edges]` lines `citing cited IF`,
    /// `[authors]` lines `paper<TAB>share<TAB>author`.
    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::parse(format!("graph line {line}"), msg);
        let mut section = "";
        let mut g = InfluenceGraph::new();
        let mut shares: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        let mut share_order: Vec<String> = Vec::new();
        let mut lonely_authors = Vec::new();
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                section = match line {
                    "[nodes]" => "nodes",
                    "[edges]" => "edges",
                    "[authors]" => "authors",
                    other => return Err(err(line_no, format!("unknown section {other}"))),
                };
                continue;
            }
            match section {
                "nodes" => {
                    g.add_paper(line.trim(), &[]).map_err(|e| err(line_no, e.to_string()))?;
                }
                "edges" => {
                    let f: Vec<&str> = line.split_whitespace().collect();
                    let [citing, cited, value] = f.as_slice() else {
                        return Err(err(line_no, "expected `citing cited IF`".into()));
                    };
                    let value: f64 = value.parse().map_err(|_| err(line_no, format!("bad IF {value:?}")))?;
                    edges.push((line_no, citing.to_string(), cited.to_string(), value));
                }
                "authors" => {
                    let f: Vec<&str> = line.splitn(3, '\t').collect();
                    let [paper, share, name] = f.as_slice() else {
                        return Err(err(line_no, "expected `paper<TAB>share<TAB>author`".into()));
                    };
                    if *paper == "-" {
                        lonely_authors.push(name.to_string());
                        continue;
                    }
                    let share: f64 = share.parse().map_err(|_| err(line_no, format!("bad share {share:?}")))?;
                    if !shares.contains_key(*paper) {
                        share_order.push(paper.to_string());
                    }
                    shares.entry(paper.to_string()).or_default().push((name.to_string(), share));
                }
                _ => return Err(err(line_no, "content before any section".into())),
            }
        }
        for (line_no, citing, cited, value) in edges {
            g.add_edge(&citing, &cited, value).map_err(|e| err(line_no, e.to_string()))?;
        }
        // author shares were declared after their nodes; attach and validate
        for paper in share_order {
            let list = &shares[&paper];
            let node = g.node(&paper)?;
            let total: f64 = list.iter().map(|(_, s)| s).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("author shares of {paper} sum to {total}, expected 1")));
            }
            for (name, share) in list {
                g.authors.entry(name.clone()).or_default().push(AuthorShare { paper: node, share: *share });
            }
        }
        for name in lonely_authors {
            g.add_author(&name);
        }
        for list in g.authors.values_mut() {
            list.sort_by_key(|s| s.paper);
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self { damping: 0.85, tol: 1e-9, max_iter: 1000 }
    }
}

impl PropagationParams {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid(format!("damping {} outside (0, 1]", self.damping)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::invalid("tol and max_iter must be positive"));
        }
        Ok(())
    }
}

/// Converged academic influence factors, aligned with the graph's nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// Largest absolute change in the final iteration.
    pub residual: f64,
}

impl Propagation {
    pub fn score_of(&self, graph: &InfluenceGraph, paper_id: &str) -> Result<f64> {
        let node = graph.node(paper_id)?;
        self.scores
            .get(node)
            .copied()
            .ok_or_else(|| Error::invalid(format!("paper {paper_id} has no score; propagate first")))
    }
}

fn update(graph: &InfluenceGraph, scores: &[f64], node: usize, damping: f64) -> f64 {
    let sum: f64 = graph.incoming[node].iter().map(|&(j, v)| scores[j] * v).sum();
    1.0 + damping * sum
}

/// Synchronous (Jacobi) iteration from AF = 1 until the largest change falls
/// below `tol`.
pub fn propagate(graph: &InfluenceGraph, params: &PropagationParams) -> Result<Propagation> {
    params.validate()?;
    let mut scores = vec![1.0; graph.len()];
    for iteration in 1..=params.max_iter {
        let next: Vec<f64> = (0..graph.len()).map(|a| update(graph, &scores, a, params.damping)).collect();
        let residual = residual(&scores, &next)?;
        scores = next;
        if residual < params.tol {
            return Ok(Propagation { scores, iterations: iteration, residual });
        }
    }
    Err(Error::Divergence {
        iterations: params.max_iter,
        residual: residual(
            &scores,
            &(0..graph.len()).map(|a| update(graph, &scores, a, params.damping)).collect::<Vec<_>>(),
        )
        .unwrap_or(f64::INFINITY),
    })
}

/// In-place (Gauss–Seidel) sweeps that update nodes in the given order, each
/// update seeing the latest values.
pub fn propagate_sweep(graph: &InfluenceGraph, params: &PropagationParams, order: &[usize]) -> Result<Propagation> {
    params.validate()?;
    let mut check = order.to_vec();
    check.sort_unstable();
    if check != (0..graph.len()).collect::<Vec<_>>() {
        return Err(Error::invalid("sweep order must be a permutation of the nodes"));
    }
    let mut scores = vec![1.0; graph.len()];
    let mut residual = f64::INFINITY;
    for iteration in 1..=params.max_iter {
        residual = 0.0;
        for &a in order {
            let v = update(graph, &scores, a, params.damping);
            if !v.is_finite() {
                return Err(Error::Divergence { iterations: iteration, residual: f64::INFINITY });
            }
            residual = f64::max(residual, (v - scores[a]).abs());
            scores[a] = v;
        }
        if residual < params.tol {
            return Ok(Propagation { scores, iterations: iteration, residual });
        }
    }
    Err(Error::Divergence { iterations: params.max_iter, residual })
}

fn residual(old: &[f64], new: &[f64]) -> Result<f64> {
    let mut r = 0.0f64;
    for (a, b) in old.iter().zip(new) {
        if !b.is_finite() {
            return Err(Error::Divergence { iterations: 0, residual: f64::INFINITY });
        }
        r = r.max((a - b).abs());
    }
    Ok(r)
}

/// `AF_a = Σ_{i ∈ P_a} C_ia · AF_i`; 0 for an author without papers.
pub fn author_influence(graph: &InfluenceGraph, propagation: &Propagation, author: &str) -> Result<f64> {
    let list = graph.authors.get(author).ok_or_else(|| Error::NotFound(format!("author {author}")))?;
    list.iter().try_fold(0.0, |acc, s| {
        let af =
            propagation.scores.get(s.paper).copied().ok_or_else(|| {
                Error::invalid(format!("paper {} has no score; propagate first", graph.nodes[s.paper]))
            })?;
        Ok(acc + s.share * af)
    })
}

/// True when deleting any single reference leaves the relative order of the
/// remaining references unchanged. Needs at least three references.
pub fn removal_invariance_check<S: ReferenceScorer + ?Sized>(references: &[ReferenceRows], scorer: &S) -> Result<bool> {
    if references.len() < 3 {
        return Err(Error::invalid("removal invariance needs at least three references"));
    }
    let order = |refs: &[ReferenceRows]| -> Result<Vec<u32>> {
        let scores = scorer.score_references(refs)?;
        let pairs: Vec<(u32, f64)> = refs.iter().map(|r| r.cit_id).zip(scores).collect();
        Ok(rank_references(&pairs)?.into_iter().map(|r| r.cit_id).collect())
    };
    let full = order(references)?;
    for removed in 0..references.len() {
        let gone = references[removed].cit_id;
        let rest: Vec<ReferenceRows> =
            references.iter().enumerate().filter(|(k, _)| *k != removed).map(|(_, r)| r.clone()).collect();
        let expected: Vec<u32> = full.iter().copied().filter(|&c| c != gone).collect();
        if order(&rest)? != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ContributionClass::*;

    #[test]
    fn band_examples() {
        assert_eq!(local_influence(Extending, 1, 11).unwrap(), 1.0);
        assert_eq!(local_influence(Related, 7, 7).unwrap(), 0.05);
        assert_eq!(local_influence(Using, 1, 1).unwrap(), 0.65);
        assert!(local_influence(Using, 3, 2).is_err());
        assert!(local_influence(Using, 1, 0).is_err());
        assert!(local_influence(Negative, 4, 4).unwrap() < 0.0);
    }

    fn two_node(value: f64) -> InfluenceGraph {
        let mut g = InfluenceGraph::new();
        g.add_paper("A", &[]).unwrap();
        g.add_paper("B", &[]).unwrap();
        g.add_edge("B", "A", value).unwrap();
        g
    }

    #[test]
    fn isolated_paper() {
        let mut g = InfluenceGraph::new();
        g.add_paper("solo", &[]).unwrap();
        let p = propagate(&g, &PropagationParams::default()).unwrap();
        assert_eq!(p.scores, [1.0]);
    }

    #[test]
    fn two_node_examples() {
        let p = propagate(&two_node(0.5), &PropagationParams::default()).unwrap();
        assert_eq!(p.scores[1], 1.0);
        assert!((p.scores[0] - 1.425).abs() < 1e-12);
        let p = propagate(&two_node(-1.0), &PropagationParams::default()).unwrap();
        assert!((p.scores[0] - 0.15).abs() < 1e-12);
    }

    #[test]
    fn author_examples() {
        let mut g = InfluenceGraph::new();
        g.add_paper("P", &[("solo".into(), 1.0)]).unwrap();
        let p = propagate(&g, &PropagationParams::default()).unwrap();
        assert_eq!(author_influence(&g, &p, "solo").unwrap(), 1.0);

        let pair = Propagation { scores: vec![2.0], iterations: 1, residual: 0.0 };
        let mut g = InfluenceGraph::new();
        g.add_paper("P", &[("x".into(), 0.5), ("y".into(), 0.5)]).unwrap();
        g.add_author("idle");
        assert_eq!(author_influence(&g, &pair, "x").unwrap(), 1.0);
        assert_eq!(author_influence(&g, &pair, "y").unwrap(), 1.0);
        assert_eq!(author_influence(&g, &pair, "idle").unwrap(), 0.0);
        assert!(matches!(author_influence(&g, &pair, "nobody"), Err(Error::NotFound(_))));
        let unscored = Propagation { scores: vec![], iterations: 0, residual: 0.0 };
        assert!(author_influence(&g, &unscored, "x").is_err());
    }

    #[test]
    fn share_validation() {
        let mut g = InfluenceGraph::new();
        assert!(g.add_paper("P", &[("x".into(), 0.5), ("y".into(), 0.6)]).is_err());
        g.add_paper("Q", &[]).unwrap();
        assert!(g.add_edge("Q", "Q", 0.5).is_err());
        assert!(g.add_edge("Q", "missing", 0.5).is_err());
    }

    #[test]
    fn cyclic_pair_at_high_damping_diverges_deterministically() {
        // AF = 1 + 0.99·AF' on both sides: contraction factor 0.99, so the
        // residual after k steps is ~99·0.99^k and 1000 steps leave ~4e-3.
        let mut g = InfluenceGraph::new();
        g.add_paper("A", &[]).unwrap();
        g.add_paper("B", &[]).unwrap();
        g.add_edge("A", "B", 1.0).unwrap();
        g.add_edge("B", "A", 1.0).unwrap();
        let params = PropagationParams { damping: 0.99, ..Default::default() };
        let first = propagate(&g, &params).unwrap_err();
        let second = propagate(&g, &params).unwrap_err();
        assert_eq!(first.to_string(), second.to_string());
        assert!(matches!(first, Error::Divergence { iterations: 1000, .. }));
        // with room to converge, the fixpoint is 1 / (1 - 0.99) = 100
        let long = PropagationParams { max_iter: 10_000, ..params };
        let p = propagate(&g, &long).unwrap();
        assert!((p.scores[0] - 100.0).abs() < 1e-6);

        // opposite signs: AF_A = 1 + .99 AF_B, AF_B = 1 - .99 AF_A
        let mut g = InfluenceGraph::new();
        g.add_paper("A", &[]).unwrap();
        g.add_paper("B", &[]).unwrap();
        g.add_edge("B", "A", 1.0).unwrap();
        g.add_edge("A", "B", -1.0).unwrap();
        let p = propagate(&g, &long).unwrap();
        let expect_a = 1.99 / (1.0 + 0.99 * 0.99);
        assert!((p.scores[0] - expect_a).abs() < 1e-6);
        assert!((p.scores[1] - (1.0 - 0.99 * expect_a)).abs() < 1e-6);
    }

    #[test]
    fn graph_text_round_trip() {
        let mut g = InfluenceGraph::new();
        g.add_paper("p1", &[("ja smith".into(), 0.25), ("b lee".into(), 0.75)]).unwrap();
        g.add_paper("p2", &[("ja smith".into(), 1.0)]).unwrap();
        g.add_paper("p3", &[]).unwrap();
        g.add_edge("p2", "p1", -0.3).unwrap();
        g.add_edge("p3", "p1", 0.7).unwrap();
        g.add_author("nobody");
        let back = InfluenceGraph::from_text(&g.to_text()).unwrap();
        assert_eq!(back, g);
        assert!(InfluenceGraph::from_text("[edges]\na b 0.5\n").is_err());
    }
}
