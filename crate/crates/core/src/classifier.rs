//! Four-way contribution classes for references, predicted by a categorical
//! Naive Bayes model over discretized factors.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::document::{Paper, SectionKind, Sentiment};
use crate::error::{Error, Result};

/// How much a reference contributes to the citing paper. Larger is more.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ContributionClass {
    /// Negative sentiment towards the work.
    Negative = 0,
    /// Related work.
    Related = 1,
    /// Using the work.
    Using = 2,
    /// Extending the work, highly influenced by it.
    Extending = 3,
}

impl ContributionClass {
    pub const ALL: [Self; 4] = [Self::Negative, Self::Related, Self::Using, Self::Extending];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl From<ContributionClass> for u8 {
    fn from(c: ContributionClass) -> u8 {
        c.code()
    }
}

impl TryFrom<u8> for ContributionClass {
    type Error = String;

    fn try_from(code: u8) -> std::result::Result<Self, String> {
        Self::from_code(code).ok_or_else(|| format!("class {code} not in 0..=3"))
    }
}

impl fmt::Display for ContributionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Per-reference factor record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorVector {
    pub au_overlap: f64,
    /// Most frequent section among the reference's mentions.
    pub sec_id: SectionKind,
    pub n_cit: usize,
    /// Summed over mentions.
    pub cit_word: usize,
    /// Sign of the summed mention labels.
    pub sen_label: Sentiment,
}

/// Aggregates the mentions of reference `cit_id` into its factor vector.
pub fn aggregate_factors(paper: &Paper, cit_id: u32) -> Result<FactorVector> {
    let reference = paper
        .reference(cit_id)
        .ok_or_else(|| Error::NotFound(format!("reference {cit_id} in paper {}", paper.paper_id)))?;
    let mut section_counts = [0usize; 3];
    let mut n_cit = 0;
    let mut cit_word = 0;
    let mut sentiment_sum = 0i64;
    for m in paper.mentions_of(cit_id) {
        n_cit += 1;
        cit_word += m.cit_word;
        sentiment_sum += m.sen_label.value() as i64;
        section_counts[m.sec_id.code() as usize] += 1;
    }
    // mode, ties toward the smaller code
    let best = section_counts.iter().copied().max().unwrap_or(0);
    let sec_code = section_counts.iter().position(|&c| c == best).unwrap_or(0);
    Ok(FactorVector {
        au_overlap: reference.au_overlap,
        sec_id: SectionKind::from_code(sec_code as u8).unwrap(),
        n_cit,
        cit_word,
        sen_label: Sentiment::sign_of(sentiment_sum),
    })
}

pub const N_FEATURES: usize = 5;
pub const N_VALUES: usize = 3;
pub const FEATURE_NAMES: [&str; N_FEATURES] = ["au_overlap", "sec_id", "n_cit", "cit_word", "sen_label"];

/// Discretized factors, each value in `0..3`, ordered as [`FEATURE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Categorical(pub [u8; N_FEATURES]);

/// Buckets the continuous factors:
/// au_overlap {0, (0,0.5), [0.5,1]}, n_cit {≤1, 2–3, ≥4},
/// cit_word {≤25, 26–80, >80}; sec_id and sen_label pass through.
pub fn discretize(fv: &FactorVector) -> Categorical {
    let au = if fv.au_overlap <= 0.0 {
        0
    } else if fv.au_overlap < 0.5 {
        1
    } else {
        2
    };
    let n_cit = match fv.n_cit {
        0 | 1 => 0,
        2 | 3 => 1,
        _ => 2,
    };
    let cit_word = match fv.cit_word {
        0..=25 => 0,
        26..=80 => 1,
        _ => 2,
    };
    Categorical([au, fv.sec_id.code(), n_cit, cit_word, fv.sen_label.index() as u8])
}

/// Rule-based labels for corpora without annotations, applied in priority
/// order: negative sentiment → 0; author overlap ≥ 0.5 or cited ≥ 4 times → 3;
/// dominant section is main body → 2; otherwise 1.
pub fn bootstrap_label(fv: &FactorVector) -> ContributionClass {
    if fv.sen_label == Sentiment::Negative {
        ContributionClass::Negative
    } else if fv.au_overlap >= 0.5 || fv.n_cit >= 4 {
        ContributionClass::Extending
    } else if fv.sec_id == SectionKind::MainBody {
        ContributionClass::Using
    } else {
        ContributionClass::Related
    }
}

pub const DEFAULT_ALPHA: f64 = 1.0;
const HEADER: &str = "citation-nb v1";

/// Categorical Naive Bayes with Laplace smoothing.
///
/// Pseudo-counts are `α·m` with `m = N / N_distinct`, so replicating the
/// training set leaves every probability unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationClassifier {
    pub alpha: f64,
    /// Number of distinct (features, class) training records.
    pub distinct: u64,
    pub class_counts: [u64; 4],
    /// `feature_counts[feature][value][class]`.
    pub feature_counts: [[[u64; 4]; N_VALUES]; N_FEATURES],
}

pub fn train_classifier(labelled: &[(FactorVector, ContributionClass)], alpha: f64) -> Result<CitationClassifier> {
    if labelled.is_empty() {
        return Err(Error::invalid("classifier training set is empty"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let mut class_counts = [0u64; 4];
    let mut feature_counts = [[[0u64; 4]; N_VALUES]; N_FEATURES];
    let mut distinct = BTreeSet::new();
    for (fv, class) in labelled {
        let x = discretize(fv);
        let c = class.code() as usize;
        distinct.insert((x, c));
        class_counts[c] += 1;
        for (f, &v) in x.0.iter().enumerate() {
            feature_counts[f][v as usize][c] += 1;
        }
    }
    Ok(CitationClassifier { alpha, distinct: distinct.len() as u64, class_counts, feature_counts })
}

impl CitationClassifier {
    fn pseudo_count(&self) -> f64 {
        let total: u64 = self.class_counts.iter().sum();
        self.alpha * (total as f64 / self.distinct as f64)
    }

    /// Unnormalized log posterior per class.
    pub fn log_posterior(&self, x: &Categorical) -> [f64; 4] {
        let total: u64 = self.class_counts.iter().sum();
        let a = self.pseudo_count();
        let mut out = [0.0; 4];
        for (c, slot) in out.iter_mut().enumerate() {
            let nc = self.class_counts[c] as f64;
            let mut lp = ((nc + a) / (total as f64 + 4.0 * a)).ln();
            for (f, &v) in x.0.iter().enumerate() {
                lp += ((self.feature_counts[f][v as usize][c] as f64 + a) / (nc + N_VALUES as f64 * a)).ln();
            }
            *slot = lp;
        }
        out
    }

    /// Normalized posterior probabilities per class.
    pub fn posterior(&self, fv: &FactorVector) -> [f64; 4] {
        let lp = self.log_posterior(&discretize(fv));
        let max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights = lp.map(|v| (v - max).exp());
        let z: f64 = weights.iter().sum();
        weights.map(|w| w / z)
    }

    /// Most probable class; ties go to the lower class.
    pub fn classify(&self, fv: &FactorVector) -> ContributionClass {
        let lp = self.log_posterior(&discretize(fv));
        let mut best = 0;
        for c in 1..4 {
            let (a, b) = (lp[c], lp[best]);
            if a > b && (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                best = c;
            }
        }
        ContributionClass::ALL[best]
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\nalpha {}\ndistinct {}\n", self.alpha, self.distinct);
        let c = self.class_counts;
        let _ = writeln!(out, "classes {} {} {} {}", c[0], c[1], c[2], c[3]);
        for (f, name) in FEATURE_NAMES.iter().enumerate() {
            for v in 0..N_VALUES {
                let k = self.feature_counts[f][v];
                let _ = writeln!(out, "feature {name} {v} {} {} {} {}", k[0], k[1], k[2], k[3]);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |msg: String| Error::model_format("classifier", msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(HEADER) {
            return Err(err("missing header".into()));
        }
        let mut field = |key: &str| -> Result<Vec<String>> {
            let line = lines.next().ok_or_else(|| err(format!("truncated before {key}")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(err(format!("expected {key}, got {line:?}")));
            }
            Ok(parts.map(String::from).collect())
        };
        let num = |s: &str| s.parse::<u64>().map_err(|_| err(format!("bad count {s:?}")));
        let alpha: f64 = field("alpha")?.first().and_then(|v| v.parse().ok()).ok_or_else(|| err("bad alpha".into()))?;
        let distinct = num(field("distinct")?.first().map(String::as_str).unwrap_or(""))?;
        let classes = field("classes")?;
        if classes.len() != 4 {
            return Err(err("classes needs four counts".into()));
        }
        let mut class_counts = [0u64; 4];
        for (slot, v) in class_counts.iter_mut().zip(&classes) {
            *slot = num(v)?;
        }
        let mut feature_counts = [[[0u64; 4]; N_VALUES]; N_FEATURES];
        for (f, name) in FEATURE_NAMES.iter().enumerate() {
            for v in 0..N_VALUES {
                let parts = field("feature")?;
                if parts.len() != 6 || parts[0] != *name || parts[1] != v.to_string() {
                    return Err(err(format!("expected feature {name} {v}")));
                }
                for c in 0..4 {
                    feature_counts[f][v][c] = num(&parts[2 + c])?;
                }
            }
        }
        if distinct == 0 {
            return Err(err("distinct must be positive".into()));
        }
        Ok(Self { alpha, distinct, class_counts, feature_counts })
    }
}

/// Header line of the labelled-data file.
pub const LABELLED_HEADER: &str = "au_overlap\tsec_id\tn_cit\tcit_word\tsen_label\tclass";

/// Parses labelled factor records: tab-separated `au_overlap sec_id n_cit
/// cit_word sen_label class`, with an optional header line.
pub fn parse_labelled(text: &str) -> Result<Vec<(FactorVector, ContributionClass)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == LABELLED_HEADER {
            continue;
        }
        let at = || format!("line {}", i + 1);
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(Error::parse(at(), "expected six tab-separated fields"));
        }
        let bad = |k: usize| Error::parse(at(), format!("bad {} {:?}", FEATURE_NAMES[k], f[k]));
        let au_overlap: f64 = f[0].parse().map_err(|_| bad(0))?;
        if !(0.0..=1.0).contains(&au_overlap) {
            return Err(bad(0));
        }
        let fv = FactorVector {
            au_overlap,
            sec_id: f[1].parse().ok().and_then(SectionKind::from_code).ok_or_else(|| bad(1))?,
            n_cit: f[2].parse().map_err(|_| bad(2))?,
            cit_word: f[3].parse().map_err(|_| bad(3))?,
            sen_label: f[4].parse().ok().and_then(Sentiment::from_value).ok_or_else(|| bad(4))?,
        };
        let class = f[5]
            .parse()
            .ok()
            .and_then(ContributionClass::from_code)
            .ok_or_else(|| Error::parse(at(), format!("bad class {:?}", f[5])))?;
        out.push((fv, class));
    }
    Ok(out)
}

pub fn format_labelled(records: &[(FactorVector, ContributionClass)]) -> String {
    let mut out = format!("{LABELLED_HEADER}\n");
    for (fv, c) in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            fv.au_overlap,
            fv.sec_id.code(),
            fv.n_cit,
            fv.cit_word,
            fv.sen_label.value(),
            c
        );
    }
    out
}
