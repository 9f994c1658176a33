//! Reference ranking.
//!
//! Every citation occurrence is scored individually from its factor
//! quaternion `(au_overlap, n_cit, cit_word, sen_label)`; a reference's score
//! is the mean over its occurrences, and references are ranked by that mean.

pub mod lambdamart;
pub mod ndcg;
pub mod tree;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifier::ContributionClass;
use crate::document::{Paper, Sentiment};
use crate::error::{Error, Result};

pub use lambdamart::{train_lambdamart, LambdaMartConfig, RankingQuery, TrainingTrace};
pub use ndcg::ndcg;
pub use tree::{Node, RegressionTree, Row};

/// Feature quaternion of one citation occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CitationFeature {
    pub au_overlap: f64,
    /// Mention count of the reference, repeated on each of its occurrences.
    pub n_cit: usize,
    pub cit_word: usize,
    pub sen_label: Sentiment,
}

impl CitationFeature {
    pub fn to_row(&self) -> Row {
        [self.au_overlap, self.n_cit as f64, self.cit_word as f64, self.sen_label.value() as f64]
    }
}

/// The occurrence rows of one reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRows {
    pub cit_id: u32,
    pub rows: Vec<CitationFeature>,
}

/// Occurrence rows of every cited reference of `paper`, in reference-list
/// order. References without mentions are left out. The paper's mentions
/// should already carry contexts and sentiment.
pub fn paper_rows(paper: &Paper) -> Vec<ReferenceRows> {
    paper
        .references
        .iter()
        .filter_map(|r| {
            let rows: Vec<CitationFeature> = paper
                .mentions_of(r.cit_id)
                .map(|m| CitationFeature {
                    au_overlap: r.au_overlap,
                    n_cit: r.n_cit,
                    cit_word: m.cit_word,
                    sen_label: m.sen_label,
                })
                .collect();
            (!rows.is_empty()).then_some(ReferenceRows { cit_id: r.cit_id, rows })
        })
        .collect()
}

/// Sum of `learning_rate · tree(x)` over the trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtEnsemble {
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
}

const HEADER: &str = "lambdamart v1";

impl GbdtEnsemble {
    pub fn score_row(&self, x: &Row) -> f64 {
        self.trees.iter().fold(0.0, |acc, t| acc + self.learning_rate * t.predict(x))
    }

    /// Score `s_ij` of one citation occurrence.
    pub fn score_citation(&self, f: &CitationFeature) -> f64 {
        self.score_row(&f.to_row())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{HEADER}\nlearning_rate {}\nfeatures {}\ntrees {}\n",
            self.learning_rate,
            tree::N_FEATURES,
            self.trees.len()
        );
        for (k, t) in self.trees.iter().enumerate() {
            let _ = writeln!(out, "tree {k} {}", t.nodes.len());
            for node in &t.nodes {
                match node {
                    Node::Split { feature, threshold, left, right } => {
                        let _ = writeln!(out, "split {feature} {threshold} {left} {right}");
                    }
                    Node::Leaf { value } => {
                        let _ = writeln!(out, "leaf {value}");
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::model_format("ranker", format!("line {line}: {msg}"));
        let lines: Vec<(usize, &str)> =
            text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()).collect();
        let mut cursor = 0;
        let mut next = |what: &str| {
            cursor += 1;
            lines.get(cursor - 1).copied().ok_or_else(|| err(0, &format!("truncated before {what}")))
        };
        let keyed = |line: (usize, &str), key: &str| -> Result<(usize, String)> {
            let (i, l) = line;
            l.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(|v| (i, v.to_string()))
                .ok_or_else(|| err(i, &format!("expected {key}")))
        };
        let (i, header) = next("header")?;
        if header != HEADER {
            return Err(err(i, "missing header"));
        }
        let (i, lr) = keyed(next("learning_rate")?, "learning_rate")?;
        let learning_rate: f64 = lr.parse().map_err(|_| err(i, "bad learning_rate"))?;
        let (i, nf) = keyed(next("features")?, "features")?;
        if nf.parse::<usize>().ok() != Some(tree::N_FEATURES) {
            return Err(err(i, "unsupported feature count"));
        }
        let (i, nt) = keyed(next("trees")?, "trees")?;
        let n_trees: usize = nt.parse().map_err(|_| err(i, "bad tree count"))?;
        let mut trees = Vec::with_capacity(n_trees);
        for k in 0..n_trees {
            let (i, head) = keyed(next("tree")?, "tree")?;
            let parts: Vec<&str> = head.split(' ').collect();
            let n_nodes: usize = match parts.as_slice() {
                [idx, n] if idx.parse::<usize>().ok() == Some(k) => n.parse().map_err(|_| err(i, "bad node count"))?,
                _ => return Err(err(i, "bad tree header")),
            };
            let mut nodes = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                let (i, l) = next("node")?;
                let f: Vec<&str> = l.split(' ').collect();
                let node = match f.as_slice() {
                    ["leaf", v] => Node::Leaf { value: v.parse().map_err(|_| err(i, "bad leaf"))? },
                    ["split", feat, thr, left, right] => Node::Split {
                        feature: feat.parse().map_err(|_| err(i, "bad feature"))?,
                        threshold: thr.parse().map_err(|_| err(i, "bad threshold"))?,
                        left: left.parse().map_err(|_| err(i, "bad child"))?,
                        right: right.parse().map_err(|_| err(i, "bad child"))?,
                    },
                    _ => return Err(err(i, "expected leaf or split")),
                };
                nodes.push(node);
            }
            let tree = RegressionTree { nodes };
            if !tree.is_well_formed() {
                return Err(err(i, &format!("tree {k} is malformed")));
            }
            trees.push(tree);
        }
        Ok(Self { learning_rate, trees })
    }
}

/// Mean of a reference's occurrence scores.
pub fn score_reference(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::invalid("reference has no citation occurrences to score"));
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Something that scores all references of one paper at once.
///
/// The ensemble scores each reference from its own rows only; the trait
/// exists so that scorers which look at the whole set can be tested against
/// the removal-invariance check.
pub trait ReferenceScorer {
    fn score_references(&self, references: &[ReferenceRows]) -> Result<Vec<f64>>;
}

impl ReferenceScorer for GbdtEnsemble {
    fn score_references(&self, references: &[ReferenceRows]) -> Result<Vec<f64>> {
        references
            .iter()
            .map(|r| {
                let s: Vec<f64> = r.rows.iter().map(|f| self.score_citation(f)).collect();
                score_reference(&s)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedScore {
    pub cit_id: u32,
    pub score: f64,
    /// 1 is the highest score.
    pub rank: usize,
}

/// Ranks by descending score; equal scores are ordered by ascending cit_id.
pub fn rank_references(scored: &[(u32, f64)]) -> Result<Vec<RankedScore>> {
    let ids: BTreeSet<u32> = scored.iter().map(|(c, _)| *c).collect();
    if ids.len() != scored.len() {
        return Err(Error::invalid("duplicate cit_id in ranking input"));
    }
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(sorted.into_iter().enumerate().map(|(k, (cit_id, score))| RankedScore { cit_id, score, rank: k + 1 }).collect())
}

/// Final per-reference outcome of the contribution stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedReference {
    pub cit_id: u32,
    pub score: f64,
    pub rank: usize,
    pub class: ContributionClass,
    /// Signed local influence in [-1, 1].
    pub local_influence: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feature(n_cit: usize) -> CitationFeature {
        CitationFeature { au_overlap: 0.0, n_cit, cit_word: 10, sen_label: Sentiment::Neutral }
    }

    #[test]
    fn empty_ensemble_scores_zero() {
        let e = GbdtEnsemble { learning_rate: 0.1, trees: vec![] };
        assert_eq!(e.score_citation(&feature(5)), 0.0);
    }

    #[test]
    fn single_leaf() {
        let e = GbdtEnsemble { learning_rate: 0.5, trees: vec![RegressionTree::leaf(0.8)] };
        assert_eq!(e.score_citation(&feature(1)), 0.5 * 0.8);
    }

    #[test]
    fn split_on_n_cit() {
        let tree = RegressionTree {
            nodes: vec![
                Node::Split { feature: 1, threshold: 2.0, left: 1, right: 2 },
                Node::Leaf { value: 0.1 },
                Node::Leaf { value: 0.9 },
            ],
        };
        let e = GbdtEnsemble { learning_rate: 1.0, trees: vec![tree] };
        assert_eq!(e.score_citation(&feature(3)), 0.9);
        let back = GbdtEnsemble::from_text(&e.to_text()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn reference_means() {
        assert_eq!(score_reference(&[0.4]).unwrap(), 0.4);
        assert!((score_reference(&[0.2, 0.8]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(score_reference(&[0.3, 0.3, 0.3]).unwrap(), 0.3);
        assert!(score_reference(&[]).is_err());
    }

    #[test]
    fn ranking() {
        let ranks =
            |v: &[(u32, f64)]| rank_references(v).unwrap().iter().map(|r| (r.cit_id, r.rank)).collect::<Vec<_>>();
        assert_eq!(ranks(&[(1, 0.9), (2, 0.1)]), [(1, 1), (2, 2)]);
        assert_eq!(ranks(&[(2, 0.5), (1, 0.5)]), [(1, 1), (2, 2)]);
        assert_eq!(ranks(&[(3, 0.2), (1, 0.7), (2, 0.4)]), [(1, 1), (2, 2), (3, 3)]);
        assert!(rank_references(&[(1, 0.1), (1, 0.2)]).is_err());
    }

    #[test]
    fn model_text_rejects_garbage() {
        assert!(GbdtEnsemble::from_text("lambdamart v1\nlearning_rate x\n").is_err());
        assert!(GbdtEnsemble::from_text(
            "lambdamart v1\nlearning_rate 0.1\nfeatures 4\ntrees 1\ntree 0 1\nsplit 0 1 0 0\n"
        )
        .is_err());
    }
}
