//! Seeded synthetic data with known generating rules, for training demos and
//! accuracy checks where real annotated corpora are unavailable.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{ContributionClass, FactorVector};
use crate::document::{SectionKind, Sentiment};
use crate::influence::InfluenceGraph;
use crate::ranker::{CitationFeature, RankingQuery, ReferenceRows};
use crate::span::{AnnotatedToken, SpanSentence};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_sentiment<R: Rng>(rng: &mut R) -> Sentiment {
    *Sentiment::ALL.choose(rng).expect("non-empty")
}

pub fn random_citation<R: Rng>(rng: &mut R) -> CitationFeature {
    CitationFeature {
        au_overlap: if rng.random_bool(0.6) { 0.0 } else { rng.random_range(0.0..=1.0) },
        n_cit: rng.random_range(1..=10),
        cit_word: rng.random_range(5..=150),
        sen_label: random_sentiment(rng),
    }
}

/// Latent relevance the ranking labels are cut from; increasing in every
/// feature.
pub fn ranking_utility(f: &CitationFeature) -> f64 {
    0.5 * f.n_cit as f64 + 3.0 * f.au_overlap + 1.5 * f.sen_label.value() as f64 + f.cit_word as f64 / 50.0
}

/// Relevance label in 0..=3 from the utility plus uniform noise in
/// `[-noise, noise]`.
pub fn ranking_label<R: Rng>(f: &CitationFeature, noise: f64, rng: &mut R) -> u8 {
    let u = ranking_utility(f) + if noise > 0.0 { rng.random_range(-noise..=noise) } else { 0.0 };
    match u {
        u if u < 2.0 => 0,
        u if u < 3.5 => 1,
        u if u < 5.0 => 2,
        _ => 3,
    }
}

/// Ranking queries of 5 to 15 citation occurrences each.
pub fn ranking_dataset(n_queries: usize, noise: f64, seed: u64) -> Vec<RankingQuery> {
    let mut rng = rng(seed);
    (0..n_queries)
        .map(|_| {
            let n = rng.random_range(5..=15);
            let feats: Vec<CitationFeature> = (0..n).map(|_| random_citation(&mut rng)).collect();
            RankingQuery {
                rows: feats.iter().map(CitationFeature::to_row).collect(),
                labels: feats.iter().map(|f| ranking_label(f, noise, &mut rng)).collect(),
            }
        })
        .collect()
}

/// A paper's cited references, 1 to 4 occurrences each; `n_cit` agrees with
/// the occurrence count.
pub fn random_references<R: Rng>(rng: &mut R, n_refs: usize) -> Vec<ReferenceRows> {
    (0..n_refs)
        .map(|k| {
            let n_cit = rng.random_range(1..=4);
            let au_overlap = if rng.random_bool(0.7) { 0.0 } else { rng.random_range(0.0..=1.0) };
            let rows = (0..n_cit)
                .map(|_| CitationFeature {
                    au_overlap,
                    n_cit,
                    cit_word: rng.random_range(5..=150),
                    sen_label: random_sentiment(rng),
                })
                .collect();
            ReferenceRows { cit_id: k as u32 + 1, rows }
        })
        .collect()
}

/// Factor vector drawn from the region that defines its class, so the
/// classes are separable on the discretized features.
pub fn factor_for_class<R: Rng>(class: ContributionClass, rng: &mut R) -> FactorVector {
    let non_negative = |rng: &mut R| {
        if rng.random_bool(0.5) {
            Sentiment::Neutral
        } else {
            Sentiment::Positive
        }
    };
    let low_count = |rng: &mut R| rng.random_range(1..=3);
    let (au_overlap, sec_id, n_cit, sen_label) = match class {
        ContributionClass::Negative => (
            if rng.random_bool(0.7) { 0.0 } else { rng.random_range(0.01..0.5) },
            *SectionKind::ALL.choose(rng).expect("non-empty"),
            rng.random_range(1..=6),
            Sentiment::Negative,
        ),
        ContributionClass::Extending => {
            let au = if rng.random_bool(0.5) { rng.random_range(0.5..=1.0) } else { 0.0 };
            let n = if au > 0.0 { rng.random_range(1..=8) } else { rng.random_range(4..=8) };
            (au, *SectionKind::ALL.choose(rng).expect("non-empty"), n, non_negative(rng))
        }
        ContributionClass::Using => (0.0, SectionKind::MainBody, low_count(rng), non_negative(rng)),
        ContributionClass::Related => (
            0.0,
            *[SectionKind::Background, SectionKind::Closing].choose(rng).expect("non-empty"),
            low_count(rng),
            non_negative(rng),
        ),
    };
    FactorVector { au_overlap, sec_id, n_cit, cit_word: rng.random_range(5..=150), sen_label }
}

/// Balanced-in-expectation labelled factor vectors.
pub fn classifier_dataset(n: usize, seed: u64) -> Vec<(FactorVector, ContributionClass)> {
    let mut rng = rng(seed);
    (0..n)
        .map(|_| {
            let class = *ContributionClass::ALL.choose(&mut rng).expect("non-empty");
            (factor_for_class(class, &mut rng), class)
        })
        .collect()
}

/// Random DAG over `n` papers: a hidden order decides who may cite whom,
/// node ids are inserted shuffled, each admissible edge exists with
/// probability `edge_prob`, IF uniform in [-1, 1].
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, edge_prob: f64) -> InfluenceGraph {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut g = InfluenceGraph::new();
    for &k in &order {
        g.add_paper(&format!("n{k:03}"), &[]).expect("fresh id");
    }
    for citing in 0..n {
        for cited in 0..citing {
            if rng.random_bool(edge_prob) {
                let value = rng.random_range(-1.0..=1.0);
                g.add_edge(&format!("n{citing:03}"), &format!("n{cited:03}"), value).expect("valid edge");
            }
        }
    }
    g
}

const NOUNS: [&str; 12] =
    ["model", "graph", "method", "corpus", "result", "network", "feature", "task", "score", "parser", "system", "data"];
const VERBS: [&str; 8] = ["uses", "improves", "reports", "shows", "extends", "builds", "learns", "predicts"];
const ADJECTIVES: [&str; 6] = ["neural", "sparse", "large", "robust", "simple", "recent"];
const OTHER: [(&str, &str); 6] =
    [("the", "DT"), ("a", "DT"), ("of", "IN"), ("on", "IN"), ("with", "IN"), ("this", "DT")];
const DELIMITERS: [(&str, &str); 8] = [
    (",", ","),
    (";", ":"),
    (":", ":"),
    ("and", "CC"),
    ("or", "CC"),
    ("but", "CC"),
    ("while", "IN"),
    ("whereas", "IN"),
];

/// Gold span of a marker: same segment and at most `cutoff` words away.
pub const SPAN_CUTOFF: usize = 6;

/// Synthetic span corpus of POS-tagged sentences without dependency parses.
///
/// A token is in the marker's span iff it shares the marker's segment and
/// lies within [`SPAN_CUTOFF`] words. In a `noise` fraction of sentences the
/// annotator's cutoff slips to 5 or 7 words.
pub fn span_corpus(n_sentences: usize, noise: f64, seed: u64) -> Vec<SpanSentence> {
    let mut rng = rng(seed);
    (0..n_sentences)
        .map(|_| {
            let len = rng.random_range(10..=28);
            let target = rng.random_range(0..len);
            let cutoff = if rng.random_bool(noise) {
                *[SPAN_CUTOFF - 1, SPAN_CUTOFF + 1].choose(&mut rng).expect("non-empty")
            } else {
                SPAN_CUTOFF
            };
            let mut tokens: Vec<AnnotatedToken> = (0..len)
                .map(|i| {
                    let (text, pos) = if i == target {
                        (format!("[{}]", rng.random_range(1..=40)), "CIT")
                    } else if i > 0 && i + 1 < len && rng.random_bool(0.12) {
                        let (t, p) = DELIMITERS.choose(&mut rng).expect("non-empty");
                        (t.to_string(), *p)
                    } else {
                        match rng.random_range(0..4) {
                            0 => (NOUNS.choose(&mut rng).expect("non-empty").to_string(), "NN"),
                            1 => (VERBS.choose(&mut rng).expect("non-empty").to_string(), "VBZ"),
                            2 => (ADJECTIVES.choose(&mut rng).expect("non-empty").to_string(), "JJ"),
                            _ => {
                                let (t, p) = OTHER.choose(&mut rng).expect("non-empty");
                                (t.to_string(), *p)
                            }
                        }
                    };
                    AnnotatedToken {
                        index: i,
                        text,
                        pos_tag: Some(pos.to_string()),
                        dep_head: None,
                        dep_label: None,
                        gold_in_span: None,
                    }
                })
                .collect();
            let features = crate::span::extract_span_features(&tokens, target).expect("target in range");
            for (t, f) in tokens.iter_mut().zip(&features) {
                t.gold_in_span = Some(f.same_segment && f.distance <= cutoff);
            }
            SpanSentence { tokens, target }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(ranking_dataset(5, 0.5, 3), ranking_dataset(5, 0.5, 3));
        assert_eq!(span_corpus(5, 0.1, 3), span_corpus(5, 0.1, 3));
        assert_eq!(classifier_dataset(20, 3), classifier_dataset(20, 3));
    }

    #[test]
    fn classifier_regions_follow_bootstrap_rules() {
        for (fv, class) in classifier_dataset(400, 11) {
            assert_eq!(crate::classifier::bootstrap_label(&fv), class);
        }
    }

    #[test]
    fn dag_edges_point_backwards() {
        let g = random_dag(&mut rng(1), 30, 0.2);
        for e in g.edges() {
            assert!(g.paper_ids()[e.citing] > g.paper_ids()[e.cited]);
        }
    }
}
