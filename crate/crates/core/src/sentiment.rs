//! Citation sentiment: a multinomial Naive Bayes model over the citing
//! sentence and its contexts.
//!
//! Smoothing pseudo-counts are scaled by the corpus multiplicity
//! `m = N / N_distinct` (1 for a corpus without repeated records), which makes
//! a corpus and any whole-number replication of it train the same model.
//! Likelihoods use `α·m` per token; class priors use a fixed `m` per class so
//! that large `α` flattens the likelihoods without flattening the priors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::document::Sentiment;
use crate::error::{Error, Result};
use crate::text;

pub const DEFAULT_SMOOTHING: f64 = 1.0;

const HEADER: &str = "sentiment-nb v1";

/// Synthetic labelled citation sentences bundled with the crate.
pub const SEED_CORPUS: &str = include_str!("../data/sentiment_seed.tsv");

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentModel {
    /// Prior probability per label, indexed by [`Sentiment::index`].
    pub class_priors: [f64; 3],
    /// Natural-log likelihood of each vocabulary token per label.
    pub token_log_likelihoods: BTreeMap<String, [f64; 3]>,
    pub smoothing: f64,
}

/// Trains the model. Labels missing from the corpus keep the prior mass
/// contributed by smoothing.
pub fn train_sentiment<S: AsRef<str>>(corpus: &[(S, Sentiment)], smoothing: f64) -> Result<SentimentModel> {
    if corpus.is_empty() {
        return Err(Error::invalid("sentiment corpus is empty"));
    }
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(Error::invalid(format!("smoothing must be positive, got {smoothing}")));
    }
    let distinct: BTreeSet<(&str, Sentiment)> = corpus.iter().map(|(t, l)| (t.as_ref(), *l)).collect();
    let multiplicity = corpus.len() as f64 / distinct.len() as f64;

    let mut doc_counts = [0u64; 3];
    let mut token_totals = [0u64; 3];
    let mut token_counts: BTreeMap<String, [u64; 3]> = BTreeMap::new();
    for (t, label) in corpus {
        let c = label.index();
        doc_counts[c] += 1;
        for tok in text::tokens(t.as_ref()) {
            token_counts.entry(tok).or_default()[c] += 1;
            token_totals[c] += 1;
        }
    }

    let n = corpus.len() as f64;
    let class_priors = doc_counts.map(|k| (k as f64 + multiplicity) / (n + 3.0 * multiplicity));
    let pseudo = smoothing * multiplicity;
    let vocab = token_counts.len() as f64;
    let token_log_likelihoods = token_counts
        .into_iter()
        .map(|(tok, counts)| {
            let mut ll = [0.0; 3];
            for c in 0..3 {
                ll[c] = ((counts[c] as f64 + pseudo) / (token_totals[c] as f64 + pseudo * vocab)).ln();
            }
            (tok, ll)
        })
        .collect();
    Ok(SentimentModel { class_priors, token_log_likelihoods, smoothing })
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Argmax with ties resolved to neutral: a tie that involves neutral, or a
/// tie between negative and positive, yields neutral.
fn argmax_toward_neutral(scores: [f64; 3]) -> Sentiment {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<Sentiment> = Sentiment::ALL.into_iter().filter(|s| nearly_equal(scores[s.index()], best)).collect();
    match tied.as_slice() {
        [only] => *only,
        _ => Sentiment::Neutral,
    }
}

impl SentimentModel {
    /// Trains on the bundled seed corpus with default smoothing.
    pub fn seed() -> Self {
        let corpus = parse_corpus(SEED_CORPUS).expect("bundled corpus is well formed");
        train_sentiment(&corpus, DEFAULT_SMOOTHING).expect("bundled corpus is non-empty")
    }

    /// Unnormalized log posterior per label. Tokens outside the vocabulary
    /// are ignored; tokens are aggregated before summation so the result does
    /// not depend on word order.
    pub fn log_posterior(&self, text: &str) -> [f64; 3] {
        let mut bag: BTreeMap<String, u32> = BTreeMap::new();
        for tok in text::tokens(text) {
            *bag.entry(tok).or_default() += 1;
        }
        let mut scores = self.class_priors.map(f64::ln);
        for (tok, count) in &bag {
            if let Some(ll) = self.token_log_likelihoods.get(tok) {
                for c in 0..3 {
                    scores[c] += *count as f64 * ll[c];
                }
            }
        }
        scores
    }

    pub fn classify(&self, text: &str) -> Sentiment {
        argmax_toward_neutral(self.log_posterior(text))
    }

    /// Label of a citation judged over `context_a + cit_text + context_b`.
    pub fn sentiment(&self, cit_text: &str, context_a: &str, context_b: &str) -> Sentiment {
        let joined =
            [context_a, cit_text, context_b].iter().filter(|s| !s.is_empty()).copied().collect::<Vec<_>>().join(" ");
        self.classify(&joined)
    }

    /// Label with the largest prior, ties toward neutral.
    pub fn prior_argmax(&self) -> Sentiment {
        argmax_toward_neutral(self.class_priors)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\nsmoothing {}\n", self.smoothing);
        for s in Sentiment::ALL {
            let _ = writeln!(out, "prior {} {}", s.value(), self.class_priors[s.index()]);
        }
        for (tok, ll) in &self.token_log_likelihoods {
            let _ = writeln!(out, "{tok}\t{}\t{}\t{}", ll[0], ll[1], ll[2]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::model_format("sentiment", format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, h)) if h.trim() == HEADER => {}
            _ => return Err(err(1, "missing header")),
        }
        let smoothing = match lines.next() {
            Some((i, l)) => l
                .strip_prefix("smoothing ")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| err(i, "expected smoothing"))?,
            None => return Err(err(2, "truncated")),
        };
        let mut class_priors = [0.0; 3];
        for s in Sentiment::ALL {
            let (i, l) = lines.next().ok_or_else(|| err(0, "truncated priors"))?;
            let rest = l.strip_prefix("prior ").ok_or_else(|| err(i, "expected prior"))?;
            let (label, p) = rest.split_once(' ').ok_or_else(|| err(i, "expected prior"))?;
            if label.parse::<i8>().ok() != Some(s.value()) {
                return Err(err(i, "priors out of order"));
            }
            class_priors[s.index()] = p.parse().map_err(|_| err(i, "bad prior"))?;
        }
        let mut token_log_likelihoods = BTreeMap::new();
        for (i, l) in lines {
            if l.is_empty() {
                continue;
            }
            let fields: Vec<&str> = l.split('\t').collect();
            let [tok, a, b, c] = fields.as_slice() else {
                return Err(err(i, "expected token and three log-likelihoods"));
            };
            let parse = |v: &str| v.parse::<f64>().map_err(|_| err(i, "bad log-likelihood"));
            token_log_likelihoods.insert(tok.to_string(), [parse(a)?, parse(b)?, parse(c)?]);
        }
        Ok(Self { class_priors, token_log_likelihoods, smoothing })
    }
}

/// Parses a training corpus: one `text<TAB>label` record per line, label in
/// {-1, 0, 1}. Blank lines and lines starting with `#` are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<(String, Sentiment)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (t, label) =
            line.rsplit_once('\t').ok_or_else(|| Error::parse(format!("line {}", i + 1), "expected text<TAB>label"))?;
        let label = label
            .trim()
            .parse::<i8>()
            .ok()
            .and_then(Sentiment::from_value)
            .ok_or_else(|| Error::parse(format!("line {}", i + 1), format!("bad label {label:?}")))?;
        out.push((t.to_string(), label));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sentiment::*;

    #[test]
    fn uniform_priors_from_one_doc_per_label() {
        let m = train_sentiment(&[("a", Negative), ("b", Neutral), ("c", Positive)], 1.0).unwrap();
        for p in m.class_priors {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((m.class_priors.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_label_corpus_dominates() {
        let m = train_sentiment(&[("great method", Positive), ("strong results", Positive)], 1.0).unwrap();
        assert_eq!(m.classify("unrelated words entirely"), Positive);
        assert_eq!(m.classify(""), Positive);
    }

    #[test]
    fn two_doc_posterior() {
        // priors (1+1)/5, (0+1)/5, (1+1)/5; V = 2
        // P(good|+) = 2/3, P(good|0) = 1/2, P(good|-) = 1/3
        let m = train_sentiment(&[("good", Positive), ("bad", Negative)], 1.0).unwrap();
        let post = m.log_posterior("good good");
        let expect = [
            (0.4f64).ln() + 2.0 * (1.0f64 / 3.0).ln(),
            (0.2f64).ln() + 2.0 * (0.5f64).ln(),
            (0.4f64).ln() + 2.0 * (2.0f64 / 3.0).ln(),
        ];
        for c in 0..3 {
            assert!((post[c] - expect[c]).abs() < 1e-12);
        }
        assert_eq!(m.classify("good good"), Positive);
        assert_eq!(m.classify("bad"), Negative);
        // symmetric evidence
        assert_eq!(m.classify("good bad"), Neutral);
    }

    #[test]
    fn empty_text_with_uniform_priors_is_neutral() {
        let m = train_sentiment(&[("a", Negative), ("b", Neutral), ("c", Positive)], 1.0).unwrap();
        assert_eq!(m.sentiment("", "", ""), Neutral);
    }

    #[test]
    fn empty_corpus_is_error() {
        let empty: Vec<(String, Sentiment)> = Vec::new();
        assert!(train_sentiment(&empty, 1.0).is_err());
        assert!(train_sentiment(&[("x", Neutral)], 0.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = SentimentModel::seed();
        let back = SentimentModel::from_text(&m.to_text()).unwrap();
        assert_eq!(m, back);
        assert!(SentimentModel::from_text("nope").is_err());
    }

    #[test]
    fn corpus_parsing() {
        let c = parse_corpus("# comment\nworks well\t1\n\nfails badly\t-1\n").unwrap();
        assert_eq!(c, vec![("works well".to_string(), Positive), ("fails badly".to_string(), Negative)]);
        assert!(parse_corpus("no label here").is_err());
        assert!(parse_corpus("x\t2").is_err());
    }

    #[test]
    fn seed_model_sanity() {
        let m = SentimentModel::seed();
        assert_eq!(m.classify("this approach fails badly and performs poorly"), Negative);
        assert_eq!(m.classify("an excellent and effective method that clearly outperforms"), Positive);
        assert_eq!(m.classify("we follow the setup described in"), Neutral);
    }
}
