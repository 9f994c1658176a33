//! End-to-end stages for one citing paper and graph assembly for a corpus.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classifier::{aggregate_factors, bootstrap_label, CitationClassifier, ContributionClass, FactorVector};
use crate::context::{extract_context, ContextOptions, Direction, Relatedness};
use crate::document::Paper;
use crate::error::{Error, Result};
use crate::influence::{local_influence, InfluenceGraph};
use crate::ranker::{paper_rows, rank_references, RankedReference, RankingQuery, ReferenceScorer};
use crate::sentiment::SentimentModel;
use crate::text::normalize_whitespace;

/// Contribution classifier used by the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum ContributionModel {
    /// Rule-based labels, for corpora without annotations.
    Bootstrap,
    NaiveBayes(Box<CitationClassifier>),
}

const BOOTSTRAP_HEADER: &str = "citation-bootstrap v1";

impl ContributionModel {
    pub fn classify(&self, fv: &FactorVector) -> ContributionClass {
        match self {
            ContributionModel::Bootstrap => bootstrap_label(fv),
            ContributionModel::NaiveBayes(m) => m.classify(fv),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            ContributionModel::Bootstrap => format!("{BOOTSTRAP_HEADER}\n"),
            ContributionModel::NaiveBayes(m) => m.to_text(),
        }
    }

    pub fn from_text(text: &str) -> Result<Self> {
        if text.trim() == BOOTSTRAP_HEADER {
            Ok(ContributionModel::Bootstrap)
        } else {
            CitationClassifier::from_text(text).map(|m| ContributionModel::NaiveBayes(Box::new(m)))
        }
    }
}

/// Everything the per-paper stages need.
pub struct Models<'a> {
    pub relatedness: &'a dyn Relatedness,
    pub context: ContextOptions,
    pub sentiment: &'a SentimentModel,
    pub contribution: &'a ContributionModel,
    pub ranker: &'a dyn ReferenceScorer,
}

/// Fills each mention's contexts, sentiment label and word count.
pub fn annotate_mentions(
    paper: &Paper,
    relatedness: &dyn Relatedness,
    options: ContextOptions,
    sentiment: &SentimentModel,
) -> Paper {
    let mut out = paper.clone();
    for m in &mut out.mentions {
        m.context_a = extract_context(&paper.sentences, m.sent_id, Direction::Backward, relatedness, options);
        m.context_b = extract_context(&paper.sentences, m.sent_id, Direction::Forward, relatedness, options);
        m.sen_label = sentiment.sentiment(&m.cit_text, &m.context_a, &m.context_b);
        m.cit_word = m.count_words();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFactors {
    pub cit_id: u32,
    pub factors: FactorVector,
}

/// Stage outputs for one citing paper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperAnalysis {
    pub paper_id: String,
    /// The paper with annotated mentions.
    pub paper: Paper,
    /// Factors of every reference that is cited at least once.
    pub factors: Vec<ReferenceFactors>,
    /// Cited references in rank order.
    pub ranked: Vec<RankedReference>,
}

/// Classes of a paper's cited references, keyed by cit_id.
pub fn classify_references(
    paper: &Paper,
    contribution: &ContributionModel,
) -> Result<BTreeMap<u32, (FactorVector, ContributionClass)>> {
    paper
        .references
        .iter()
        .filter(|r| r.n_cit > 0)
        .map(|r| {
            let fv = aggregate_factors(paper, r.cit_id)?;
            Ok((r.cit_id, (fv, contribution.classify(&fv))))
        })
        .collect()
}

/// Runs context extraction, sentiment, factor aggregation, classification,
/// ranking and local-influence projection. Uncited references are left out;
/// `R` is the number of cited references.
pub fn analyze_paper(paper: &Paper, models: &Models) -> Result<PaperAnalysis> {
    let annotated = annotate_mentions(paper, models.relatedness, models.context, models.sentiment);
    let classes = classify_references(&annotated, models.contribution)?;
    let rows = paper_rows(&annotated);
    let scores = models.ranker.score_references(&rows)?;
    let scored: Vec<(u32, f64)> = rows.iter().map(|r| r.cit_id).zip(scores).collect();
    let total = scored.len();
    let ranked = rank_references(&scored)?
        .into_iter()
        .map(|r| {
            let class = classes[&r.cit_id].1;
            Ok(RankedReference {
                cit_id: r.cit_id,
                score: r.score,
                rank: r.rank,
                class,
                local_influence: local_influence(class, r.rank, total)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PaperAnalysis {
        paper_id: paper.paper_id.clone(),
        factors: classes.iter().map(|(&cit_id, &(factors, _))| ReferenceFactors { cit_id, factors }).collect(),
        paper: annotated,
        ranked,
    })
}

/// Ranking queries from annotated papers: one query per paper, one row per
/// citation occurrence, labelled with its reference's class code. Papers
/// with fewer than two occurrences are skipped.
pub fn ranking_queries(annotated: &[Paper], contribution: &ContributionModel) -> Result<Vec<RankingQuery>> {
    let mut out = Vec::new();
    for paper in annotated {
        let classes = classify_references(paper, contribution)?;
        let mut query = RankingQuery { rows: Vec::new(), labels: Vec::new() };
        for r in paper_rows(paper) {
            let label = classes[&r.cit_id].1.code();
            for f in r.rows {
                query.rows.push(f.to_row());
                query.labels.push(label);
            }
        }
        if query.rows.len() >= 2 {
            out.push(query);
        }
    }
    Ok(out)
}

/// Key for matching reference titles to corpus papers.
pub fn title_key(title: &str) -> String {
    normalize_whitespace(title).to_lowercase()
}

/// Citation graph over the analyzed papers.
///
/// A reference becomes an edge when its title equals (case- and
/// whitespace-insensitively) the title of another paper in the corpus; with
/// several candidates the smallest paper id wins. Self-citations and repeated
/// edges between the same pair (first in rank order is kept) are dropped.
/// Author shares come from each paper's byline.
pub fn build_graph(analyses: &[PaperAnalysis]) -> Result<InfluenceGraph> {
    let mut by_id: BTreeMap<&str, &PaperAnalysis> = BTreeMap::new();
    for a in analyses {
        if by_id.insert(&a.paper_id, a).is_some() {
            return Err(Error::invalid(format!("paper {} analyzed twice", a.paper_id)));
        }
    }
    let mut by_title: BTreeMap<String, &str> = BTreeMap::new();
    for (id, a) in &by_id {
        by_title.entry(title_key(&a.paper.title)).or_insert(id);
    }
    let mut g = InfluenceGraph::new();
    for (id, a) in &by_id {
        let shares: Vec<(String, f64)> =
            a.paper.authors.iter().cloned().zip(a.paper.author_shares.iter().copied()).collect();
        g.add_paper(id, &shares)?;
    }
    for (id, a) in &by_id {
        let mut linked = BTreeSet::new();
        for r in &a.ranked {
            let reference = a
                .paper
                .reference(r.cit_id)
                .ok_or_else(|| Error::invalid(format!("{id}: ranked reference {} missing", r.cit_id)))?;
            let Some(&cited) = by_title.get(&title_key(&reference.cit_title)) else {
                continue;
            };
            if cited == *id || !linked.insert(cited) {
                continue;
            }
            g.add_edge(id, cited, r.local_influence)?;
        }
    }
    Ok(g)
}
