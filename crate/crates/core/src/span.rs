//! Word-level citation-span detection.
//!
//! Each token of a citing sentence is classified as inside or outside the
//! span of one citation marker by a logistic-regression model over one-hot
//! token features.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepHead {
    Root,
    Token(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub index: usize,
    pub text: String,
    pub pos_tag: Option<String>,
    pub dep_head: Option<DepHead>,
    pub dep_label: Option<String>,
    pub gold_in_span: Option<bool>,
}

impl AnnotatedToken {
    pub fn plain(index: usize, text: &str) -> Self {
        Self { index, text: text.to_string(), pos_tag: None, dep_head: None, dep_label: None, gold_in_span: None }
    }
}

/// One annotated sentence and the index of the citation marker whose span is
/// labelled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanSentence {
    pub tokens: Vec<AnnotatedToken>,
    pub target: usize,
}

impl SpanSentence {
    pub fn validate(&self) -> Result<()> {
        if self.target >= self.tokens.len() {
            return Err(Error::invalid(format!(
                "marker index {} outside sentence of {} tokens",
                self.target,
                self.tokens.len()
            )));
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if t.index != i {
                return Err(Error::invalid(format!("token indices not consecutive at {i}")));
            }
            if let Some(DepHead::Token(h)) = t.dep_head {
                if h >= self.tokens.len() || h == i {
                    return Err(Error::invalid(format!("token {i}: bad dependency head {h}")));
                }
            }
        }
        Ok(())
    }

    pub fn gold(&self) -> Result<Vec<bool>> {
        self.tokens
            .iter()
            .map(|t| t.gold_in_span.ok_or_else(|| Error::invalid(format!("token {} has no gold label", t.index))))
            .collect()
    }
}

pub const NONE: &str = "none";
pub const CONJUNCTIONS: [&str; 5] = ["and", "or", "but", "while", "whereas"];
pub const SEGMENT_PUNCTUATION: [char; 3] = [',', ';', ':'];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanFeatures {
    /// Words between the token and the marker; 0 only for the marker.
    pub distance: usize,
    /// True iff the token precedes the marker.
    pub before: bool,
    /// True iff token and marker share a punctuation/conjunction segment.
    pub same_segment: bool,
    /// Tags of the word, the previous and the next word.
    pub pos_window: [String; 3],
    pub dtree_distance: Option<usize>,
    pub lca: Option<String>,
}

/// A token ends its segment when it is a delimiter or carries trailing
/// delimiter punctuation.
fn closes_segment(text: &str) -> bool {
    let lower = text.to_lowercase();
    CONJUNCTIONS.contains(&lower.as_str()) || text.ends_with(SEGMENT_PUNCTUATION)
}

fn segments(tokens: &[AnnotatedToken]) -> Vec<usize> {
    let mut seg = 0;
    tokens
        .iter()
        .map(|t| {
            let mine = seg;
            if closes_segment(&t.text) {
                seg += 1;
            }
            mine
        })
        .collect()
}

/// Ancestor chain from `i` up to the root, `i` first. `None` when a head is
/// missing or the heads form a cycle.
fn ancestors(tokens: &[AnnotatedToken], i: usize) -> Option<Vec<usize>> {
    let mut chain = vec![i];
    let mut cur = i;
    loop {
        match tokens[cur].dep_head? {
            DepHead::Root => return Some(chain),
            DepHead::Token(h) => {
                if chain.contains(&h) || h >= tokens.len() {
                    return None;
                }
                chain.push(h);
                cur = h;
            }
        }
    }
}

fn tree_relation(tokens: &[AnnotatedToken], i: usize, target: usize) -> (Option<usize>, Option<String>) {
    let (Some(a), Some(b)) = (ancestors(tokens, i), ancestors(tokens, target)) else {
        return (None, None);
    };
    for (da, node) in a.iter().enumerate() {
        if let Some(db) = b.iter().position(|x| x == node) {
            let label = tokens[*node].dep_label.clone().unwrap_or_else(|| NONE.to_string());
            return (Some(da + db), Some(label));
        }
    }
    (None, None)
}

pub fn extract_span_features(tokens: &[AnnotatedToken], target: usize) -> Result<Vec<SpanFeatures>> {
    if target >= tokens.len() {
        return Err(Error::invalid(format!("marker index {target} outside sentence of {} tokens", tokens.len())));
    }
    let seg = segments(tokens);
    let tag = |k: Option<usize>| -> String {
        k.and_then(|k| tokens.get(k)).and_then(|t| t.pos_tag.clone()).unwrap_or_else(|| NONE.to_string())
    };
    Ok((0..tokens.len())
        .map(|i| {
            let (dtree_distance, lca) = tree_relation(tokens, i, target);
            SpanFeatures {
                distance: i.abs_diff(target),
                before: i < target,
                same_segment: seg[i] == seg[target],
                pos_window: [tag(Some(i)), tag(i.checked_sub(1)), tag(Some(i + 1))],
                dtree_distance,
                lca,
            }
        })
        .collect())
}

/// Distances and tree distances beyond this share one indicator.
const DISTANCE_CAP: usize = 15;

/// One-hot indicator names of a token's features.
pub fn indicator_names(f: &SpanFeatures) -> Vec<String> {
    let capped = |d: usize| {
        if d > DISTANCE_CAP {
            format!("{}+", DISTANCE_CAP + 1)
        } else {
            d.to_string()
        }
    };
    vec![
        format!("dist={}", capped(f.distance)),
        format!("before={}", u8::from(f.before)),
        format!("segment={}", u8::from(f.same_segment)),
        format!("pos={}", f.pos_window[0]),
        format!("pos-1={}", f.pos_window[1]),
        format!("pos+1={}", f.pos_window[2]),
        format!("dtree={}", f.dtree_distance.map_or(NONE.to_string(), capped)),
        format!("lca={}", f.lca.as_deref().unwrap_or(NONE)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpanTrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for SpanTrainConfig {
    fn default() -> Self {
        Self { iterations: 400, learning_rate: 1.0, l2: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanModel {
    pub bias: f64,
    pub weights: BTreeMap<String, f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Trains the logistic model by full-batch gradient descent from zero
/// weights.
///
/// The gradient is an average over distinct `(features, label)` patterns
/// weighted by their frequency, so repeating the whole data set leaves the
/// weights unchanged.
pub fn train_span(data: &[SpanSentence], config: &SpanTrainConfig) -> Result<SpanModel> {
    if config.iterations == 0 || !(config.learning_rate > 0.0) || !(config.l2 >= 0.0) {
        return Err(Error::invalid("bad span training config"));
    }
    let mut vocab: BTreeMap<String, usize> = BTreeMap::new();
    let mut patterns: BTreeMap<(Vec<usize>, bool), u64> = BTreeMap::new();
    let mut total = 0u64;
    for s in data {
        s.validate()?;
        let gold = s.gold()?;
        for (f, y) in extract_span_features(&s.tokens, s.target)?.iter().zip(gold) {
            let mut idx: Vec<usize> = indicator_names(f)
                .into_iter()
                .map(|name| {
                    let n = vocab.len();
                    *vocab.entry(name).or_insert(n)
                })
                .collect();
            idx.sort_unstable();
            *patterns.entry((idx, y)).or_default() += 1;
            total += 1;
        }
    }
    let positives = patterns.iter().filter(|((_, y), _)| *y).count();
    if positives == 0 || positives == patterns.len() {
        return Err(Error::invalid("span training data needs both in-span and out-of-span tokens"));
    }
    let patterns: Vec<(Vec<usize>, f64, f64)> =
        patterns.into_iter().map(|((idx, y), c)| (idx, if y { 1.0 } else { 0.0 }, c as f64 / total as f64)).collect();

    let mut w = vec![0.0; vocab.len()];
    let mut bias = 0.0;
    let mut grad = vec![0.0; vocab.len()];
    for _ in 0..config.iterations {
        grad.iter_mut().zip(&w).for_each(|(g, wk)| *g = config.l2 * wk);
        let mut grad_bias = 0.0;
        for (idx, y, weight) in &patterns {
            let z = bias + idx.iter().map(|&k| w[k]).sum::<f64>();
            let r = weight * (sigmoid(z) - y);
            grad_bias += r;
            for &k in idx {
                grad[k] += r;
            }
        }
        bias -= config.learning_rate * grad_bias;
        w.iter_mut().zip(&grad).for_each(|(wk, g)| *wk -= config.learning_rate * g);
    }
    let weights = vocab.into_iter().map(|(name, k)| (name, w[k])).collect();
    Ok(SpanModel { bias, weights })
}

const MODEL_HEADER: &str = "span-lr v1";

impl SpanModel {
    /// Log-odds that each token is in the marker's span. Indicators unseen
    /// in training contribute nothing.
    pub fn logits(&self, tokens: &[AnnotatedToken], target: usize) -> Result<Vec<f64>> {
        Ok(extract_span_features(tokens, target)?
            .iter()
            .map(|f| self.bias + indicator_names(f).iter().filter_map(|n| self.weights.get(n)).sum::<f64>())
            .collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MODEL_HEADER}\nbias {}\nweights {}\n", self.bias, self.weights.len());
        for (name, w) in &self.weights {
            let _ = writeln!(out, "{w}\t{name}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |msg: String| Error::model_format("span", msg);
        let mut lines = text.lines();
        if lines.next() != Some(MODEL_HEADER) {
            return Err(err("missing header".into()));
        }
        let bias = lines
            .next()
            .and_then(|l| l.strip_prefix("bias "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err("bad bias line".into()))?;
        let n: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("weights "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err("bad weights line".into()))?;
        let mut weights = BTreeMap::new();
        for k in 0..n {
            let line = lines.next().ok_or_else(|| err(format!("truncated at weight {k}")))?;
            let (w, name) = line.split_once('\t').ok_or_else(|| err(format!("bad weight line {line:?}")))?;
            let w: f64 = w.parse().map_err(|_| err(format!("bad weight {w:?}")))?;
            weights.insert(name.to_string(), w);
        }
        Ok(Self { bias, weights })
    }
}

/// Anything that labels the tokens of a sentence.
pub trait SpanPredictor {
    fn predict(&self, sentence: &SpanSentence) -> Result<Vec<bool>>;
}

impl SpanPredictor for SpanModel {
    fn predict(&self, sentence: &SpanSentence) -> Result<Vec<bool>> {
        label_span(self, &sentence.tokens, sentence.target)
    }
}

/// Independent in/out decision per token; spans need not be contiguous.
pub fn label_span(model: &SpanModel, tokens: &[AnnotatedToken], target: usize) -> Result<Vec<bool>> {
    Ok(model.logits(tokens, target)?.into_iter().map(|z| z > 0.0).collect())
}

/// Micro-averaged token counts and scores over the in-span class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SpanScores {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl SpanScores {
    /// Ratios with empty denominators are 0.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self { true_positives: tp, false_positives: fp, false_negatives: fn_, precision, recall, f1 }
    }
}

/// Sentence-level fold of every sentence after a seeded shuffle; folds sizes
/// differ by at most one.
pub fn assign_folds(n_sentences: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > n_sentences {
        return Err(Error::invalid(format!("cannot split {n_sentences} sentences into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n_sentences).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n_sentences];
    for (pos, &s) in order.iter().enumerate() {
        fold[s] = pos % k;
    }
    Ok(fold)
}

/// k-fold cross-validation: `train` fits a predictor on all folds but one,
/// which it then labels; counts are pooled over all held-out tokens.
pub fn cross_validate<P, F>(data: &[SpanSentence], k: usize, seed: u64, mut train: F) -> Result<SpanScores>
where
    P: SpanPredictor,
    F: FnMut(&[SpanSentence]) -> Result<P>,
{
    let fold = assign_folds(data.len(), k, seed)?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for held in 0..k {
        let train_set: Vec<SpanSentence> =
            data.iter().zip(&fold).filter(|(_, f)| **f != held).map(|(s, _)| s.clone()).collect();
        let model = train(&train_set)?;
        for (s, _) in data.iter().zip(&fold).filter(|(_, f)| **f == held) {
            let predicted = model.predict(s)?;
            for (p, g) in predicted.iter().zip(s.gold()?) {
                match (p, g) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
        }
    }
    Ok(SpanScores::from_counts(tp, fp, fn_))
}

/// Parses the annotated corpus: sentences separated by blank lines, each
/// starting with `# marker <index>` followed by one row per token with the
/// tab- or space-separated columns `index text pos head label gold`. `_`
/// marks an absent value, `root` a root head, gold is `1` or `0`.
pub fn parse_span_corpus(text: &str) -> Result<Vec<SpanSentence>> {
    let mut out = Vec::new();
    let mut tokens = Vec::new();
    let mut target: Option<usize> = None;
    let mut start_line = 0;
    let mut flush = |tokens: &mut Vec<AnnotatedToken>, target: &mut Option<usize>, line: usize| -> Result<()> {
        if tokens.is_empty() && target.is_none() {
            return Ok(());
        }
        let t = target
            .take()
            .ok_or_else(|| Error::parse(format!("span corpus line {line}"), "sentence without `# marker` line"))?;
        let s = SpanSentence { tokens: std::mem::take(tokens), target: t };
        s.validate().map_err(|e| Error::parse(format!("span corpus line {line}"), e.to_string()))?;
        out.push(s);
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        let err = |msg: String| Error::parse(format!("span corpus line {line_no}"), msg);
        if line.is_empty() {
            flush(&mut tokens, &mut target, start_line)?;
            continue;
        }
        if tokens.is_empty() && target.is_none() {
            start_line = line_no;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("marker") {
                if target.is_some() || !tokens.is_empty() {
                    return Err(err("`# marker` must open a sentence".into()));
                }
                target = Some(v.trim().parse().map_err(|_| err(format!("bad marker index {v:?}")))?);
            }
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let [idx, text, pos, head, label, gold] = f.as_slice() else {
            return Err(err(format!("expected 6 columns, found {}", f.len())));
        };
        let opt = |v: &str| (v != "_").then(|| v.to_string());
        let index: usize = idx.parse().map_err(|_| err(format!("bad index {idx:?}")))?;
        let dep_head = match *head {
            "_" => None,
            "root" => Some(DepHead::Root),
            h => Some(DepHead::Token(h.parse().map_err(|_| err(format!("bad head {h:?}")))?)),
        };
        let gold_in_span = match *gold {
            "_" => None,
            "1" => Some(true),
            "0" => Some(false),
            g => return Err(err(format!("bad gold flag {g:?}"))),
        };
        tokens.push(AnnotatedToken {
            index,
            text: text.to_string(),
            pos_tag: opt(pos),
            dep_head,
            dep_label: opt(label),
            gold_in_span,
        });
    }
    flush(&mut tokens, &mut target, start_line)?;
    Ok(out)
}

pub fn format_span_corpus(sentences: &[SpanSentence]) -> String {
    let mut out = String::new();
    for (k, s) in sentences.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# marker {}", s.target);
        for t in &s.tokens {
            let head = match t.dep_head {
                None => "_".to_string(),
                Some(DepHead::Root) => "root".to_string(),
                Some(DepHead::Token(h)) => h.to_string(),
            };
            let gold = match t.gold_in_span {
                None => "_",
                Some(true) => "1",
                Some(false) => "0",
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{head}\t{}\t{gold}",
                t.index,
                t.text,
                t.pos_tag.as_deref().unwrap_or("_"),
                t.dep_label.as_deref().unwrap_or("_"),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(words: &str) -> Vec<AnnotatedToken> {
        words.split(' ').enumerate().map(|(i, w)| AnnotatedToken::plain(i, w)).collect()
    }

    #[test]
    fn distance_position_and_segments() {
        let toks = sentence("prior work uses graphs [3] , but we use trees");
        let f = extract_span_features(&toks, 4).unwrap();
        assert_eq!((f[1].distance, f[1].before), (3, true));
        assert_eq!((f[4].distance, f[4].same_segment), (0, true));
        assert!(f[0].same_segment);
        // the comma closes the marker's segment
        assert!(f[5].same_segment);
        assert!(!f[6].same_segment);
        assert!(!f[8].same_segment);
        assert_eq!(f[8].pos_window[0], NONE);
        assert!(extract_span_features(&toks, 10).is_err());
    }

    #[test]
    fn trailing_punctuation_and_conjunctions() {
        let toks = sentence("as shown in [1], results hold while others fail");
        let f = extract_span_features(&toks, 3).unwrap();
        assert!(f[0].same_segment && f[3].same_segment);
        assert!(!f[4].same_segment);
        assert!(f[5].same_segment == f[4].same_segment);
        assert!(!f[7].same_segment);
    }

    #[test]
    fn dependency_path_and_lca() {
        // 0 we <-1 ; 1 use root ; 2 [2] <-1 ; 3 trees <-1
        let mut toks = sentence("we use [2] trees");
        let heads = [DepHead::Token(1), DepHead::Root, DepHead::Token(3), DepHead::Token(1)];
        let labels = ["nsubj", "root", "nmod", "obj"];
        for (t, (h, l)) in toks.iter_mut().zip(heads.iter().zip(labels)) {
            t.dep_head = Some(*h);
            t.dep_label = Some(l.to_string());
        }
        let f = extract_span_features(&toks, 2).unwrap();
        assert_eq!(f[2].dtree_distance, Some(0));
        assert_eq!(f[3].dtree_distance, Some(1));
        assert_eq!(f[3].lca.as_deref(), Some("obj"));
        assert_eq!(f[0].dtree_distance, Some(3));
        assert_eq!(f[0].lca.as_deref(), Some("root"));
    }

    fn labelled(words: &str, target: usize) -> SpanSentence {
        let mut tokens = sentence(words);
        let f = extract_span_features(&tokens, target).unwrap();
        for (t, f) in tokens.iter_mut().zip(&f) {
            t.gold_in_span = Some(f.same_segment);
        }
        SpanSentence { tokens, target }
    }

    fn toy() -> Vec<SpanSentence> {
        vec![
            labelled("prior work uses graphs [3] , but we use trees", 4),
            labelled("we , unlike [1] and others , keep it", 3),
            labelled("[5] proposed this ; we extend it", 0),
            labelled("results differ , whereas [2] report gains", 4),
        ]
    }

    #[test]
    fn separable_training_is_exact() {
        let data = toy();
        let m = train_span(&data, &SpanTrainConfig::default()).unwrap();
        for s in &data {
            assert_eq!(m.predict(s).unwrap(), s.gold().unwrap());
        }
        let doubled: Vec<_> = data.iter().chain(data.iter()).cloned().collect();
        assert_eq!(train_span(&doubled, &SpanTrainConfig::default()).unwrap(), m);
        assert_eq!(SpanModel::from_text(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn single_class_rejected() {
        let mut s = labelled("a b [1]", 2);
        for t in &mut s.tokens {
            t.gold_in_span = Some(true);
        }
        assert!(train_span(&[s], &SpanTrainConfig::default()).is_err());
    }

    struct Perfect;
    impl SpanPredictor for Perfect {
        fn predict(&self, s: &SpanSentence) -> Result<Vec<bool>> {
            s.gold()
        }
    }
    struct AllOut;
    impl SpanPredictor for AllOut {
        fn predict(&self, s: &SpanSentence) -> Result<Vec<bool>> {
            Ok(vec![false; s.tokens.len()])
        }
    }

    #[test]
    fn harness_stubs() {
        let data = toy();
        let p = cross_validate(&data, 2, 7, |_| Ok(Perfect)).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        let n = cross_validate(&data, 2, 7, |_| Ok(AllOut)).unwrap();
        assert_eq!((n.recall, n.f1), (0.0, 0.0));
        assert!(cross_validate(&data, 5, 7, |_| Ok(Perfect)).is_err());
    }

    #[test]
    fn folds_partition() {
        let folds = assign_folds(23, 10, 3).unwrap();
        let mut sizes = [0; 10];
        for f in folds {
            sizes[f] += 1;
        }
        assert!(sizes.iter().all(|&s| s == 2 || s == 3));
        assert_eq!(sizes.iter().sum::<usize>(), 23);
    }

    #[test]
    fn corpus_round_trip() {
        let mut data = toy();
        data[0].tokens[0].pos_tag = Some("JJ".into());
        data[0].tokens[0].dep_head = Some(DepHead::Token(1));
        data[0].tokens[1].dep_head = Some(DepHead::Root);
        data[0].tokens[1].dep_label = Some("root".into());
        let text = format_span_corpus(&data);
        assert_eq!(parse_span_corpus(&text).unwrap(), data);
        assert!(parse_span_corpus("0 a _ _ _ 1\n").is_err());
        assert!(parse_span_corpus("# marker 4\n0 a _ _ _ 1\n").is_err());
    }
}
