//! Corpus data model and the pre-processing stage: parsing the ingestion
//! document, two-level segmentation (sections, then sentences), matching
//! in-text citation markers to the reference list, and the simple factors
//! `n_cit` and `au_overlap`.
//!
//! The ingestion format is a JSON object:
//!
//! ```json
//! {
//!   "paper_id": "p01",
//!   "title": "Sparse attention for long documents",
//!   "authors": ["Ada Byron", "Charles Baker"],
//!   "year": 2021,
//!   "sections": [
//!     { "heading": "Introduction",
//!       "paragraphs": [
//!         "Raw paragraph text, segmented on ingestion [1].",
//!         ["Or a pre-segmented paragraph [2].", "One string per sentence."]
//!       ] }
//!   ],
//!   "references": [
//!     { "cit_id": 1, "title": "...", "authors": ["..."], "year": 2019 }
//!   ]
//! }
//! ```
//!
//! An optional `author_shares` array (aligned with `authors`, summing to 1)
//! overrides the default equal split of credit between authors.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

/// Section category of a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum SectionKind {
    /// Related work, introduction and other background.
    Background = 0,
    /// Methodology, experiments and the rest of the main body.
    MainBody = 1,
    /// Conclusion and closing parts.
    Closing = 2,
}

impl SectionKind {
    pub const ALL: [SectionKind; 3] = [Self::Background, Self::MainBody, Self::Closing];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl From<SectionKind> for u8 {
    fn from(kind: SectionKind) -> u8 {
        kind.code()
    }
}

impl TryFrom<u8> for SectionKind {
    type Error = String;

    fn try_from(code: u8) -> std::result::Result<Self, String> {
        Self::from_code(code).ok_or_else(|| format!("section code {code} not in 0..=2"))
    }
}

/// Sentiment polarity of citing text towards a reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sentiment {
    Negative = -1,
    Neutral = 0,
    Positive = 1,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Self::Negative, Self::Neutral, Self::Positive];

    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn from_value(v: i8) -> Option<Self> {
        match v {
            -1 => Some(Self::Negative),
            0 => Some(Self::Neutral),
            1 => Some(Self::Positive),
            _ => None,
        }
    }

    /// Sign of an integer sum of labels.
    pub fn sign_of(sum: i64) -> Self {
        match sum.signum() {
            -1 => Self::Negative,
            1 => Self::Positive,
            _ => Self::Neutral,
        }
    }

    /// Position in [`Sentiment::ALL`].
    pub fn index(self) -> usize {
        (self.value() + 1) as usize
    }
}

impl From<Sentiment> for i8 {
    fn from(s: Sentiment) -> i8 {
        s.value()
    }
}

impl TryFrom<i8> for Sentiment {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        Self::from_value(v).ok_or_else(|| format!("sentiment label {v} not in {{-1,0,1}}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub sec_id: SectionKind,
    pub heading: String,
    /// Each paragraph is the list of its sentence ids.
    pub paragraphs: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub sent_id: usize,
    pub text: String,
    /// Paragraph number, counted across the whole document.
    pub paragraph_id: usize,
    pub section: SectionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub cit_id: u32,
    pub cit_title: String,
    pub cit_author: Vec<String>,
    pub cit_year: i32,
    pub n_cit: usize,
    pub au_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationMention {
    pub cit_id: u32,
    pub sent_id: usize,
    pub sec_id: SectionKind,
    pub cit_text: String,
    pub context_a: String,
    pub context_b: String,
    pub sen_label: Sentiment,
    pub cit_word: usize,
}

impl CitationMention {
    /// Token count of `context_a + cit_text + context_b`.
    pub fn count_words(&self) -> usize {
        text::word_count(&self.context_a) + text::word_count(&self.cit_text) + text::word_count(&self.context_b)
    }
}

/// A citation marker that could not be resolved against the reference list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub sent_id: usize,
    pub marker: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paper {
    pub paper_id: String,
    pub title: String,
    /// Normalized author names, in byline order.
    pub authors: Vec<String>,
    /// Credit share of each author, aligned with `authors`; sums to 1.
    pub author_shares: Vec<f64>,
    pub year: i32,
    pub sections: Vec<Section>,
    pub sentences: Vec<Sentence>,
    pub references: Vec<ReferenceEntry>,
    pub mentions: Vec<CitationMention>,
}

impl Paper {
    pub fn reference(&self, cit_id: u32) -> Option<&ReferenceEntry> {
        self.references.iter().find(|r| r.cit_id == cit_id)
    }

    pub fn mentions_of(&self, cit_id: u32) -> impl Iterator<Item = &CitationMention> {
        self.mentions.iter().filter(move |m| m.cit_id == cit_id)
    }
}

/// Result of ingesting one document.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub paper: Paper,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Treat unresolvable citation markers as fatal.
    pub strict: bool,
}

// --- ingestion schema -------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    paper_id: String,
    title: String,
    authors: Vec<String>,
    year: i32,
    #[serde(default)]
    author_shares: Option<Vec<f64>>,
    sections: Vec<RawSection>,
    references: Vec<RawReference>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    heading: String,
    paragraphs: Vec<RawParagraph>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawParagraph {
    Text(String),
    Sentences(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    cit_id: u32,
    title: String,
    authors: Vec<String>,
    year: i32,
}

/// Parses and validates an ingestion document, segments it and resolves its
/// citation markers.
pub fn parse_paper(json: &str, options: ParseOptions) -> Result<Ingested> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let raw: RawDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let element = if path == "." { "document".to_string() } else { path };
        Error::parse(element, e.into_inner().to_string())
    })?;
    build_paper(raw, options)
}

fn valid_paper_id(id: &str) -> bool {
    !id.is_empty()
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.')
}

fn build_paper(raw: RawDocument, options: ParseOptions) -> Result<Ingested> {
    if !valid_paper_id(&raw.paper_id) {
        return Err(Error::parse("paper_id", "must be non-empty and use only [A-Za-z0-9._-]"));
    }
    let authors = normalize_author_list(&raw.authors, "authors")?;
    let author_shares = match raw.author_shares {
        None if authors.is_empty() => Vec::new(),
        None => vec![1.0 / authors.len() as f64; authors.len()],
        Some(shares) => {
            if shares.len() != authors.len() {
                return Err(Error::parse(
                    "author_shares",
                    format!("{} shares for {} authors", shares.len(), authors.len()),
                ));
            }
            if let Some(i) = shares.iter().position(|s| !(0.0..=1.0).contains(s)) {
                return Err(Error::parse(format!("author_shares[{i}]"), "share outside [0,1]"));
            }
            let total: f64 = shares.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::parse("author_shares", format!("shares sum to {total}, expected 1")));
            }
            shares
        }
    };

    if raw.sections.is_empty() {
        return Err(Error::parse("sections", "document has no sections"));
    }
    let mut sections = Vec::with_capacity(raw.sections.len());
    let mut sentences: Vec<Sentence> = Vec::new();
    let mut paragraph_id = 0;
    for (si, raw_section) in raw.sections.into_iter().enumerate() {
        let heading = text::normalize_whitespace(&raw_section.heading);
        if heading.is_empty() {
            return Err(Error::parse(format!("sections[{si}].heading"), "empty heading"));
        }
        let sec_id = classify_section(&heading);
        let mut paragraphs = Vec::with_capacity(raw_section.paragraphs.len());
        for (pi, para) in raw_section.paragraphs.into_iter().enumerate() {
            let element = format!("sections[{si}].paragraphs[{pi}]");
            let texts: Vec<String> = match para {
                RawParagraph::Text(t) => {
                    let normalized = text::normalize_whitespace(&t);
                    if normalized.is_empty() {
                        return Err(Error::parse(element, "empty paragraph"));
                    }
                    segment_sentences(&normalized)
                }
                RawParagraph::Sentences(list) => {
                    if list.is_empty() {
                        return Err(Error::parse(element, "empty paragraph"));
                    }
                    let mut out = Vec::with_capacity(list.len());
                    for (k, s) in list.iter().enumerate() {
                        let normalized = text::normalize_whitespace(s);
                        if normalized.is_empty() {
                            return Err(Error::parse(format!("{element}[{k}]"), "empty sentence"));
                        }
                        out.push(normalized);
                    }
                    out
                }
            };
            let mut ids = Vec::with_capacity(texts.len());
            for t in texts {
                let sent_id = sentences.len();
                ids.push(sent_id);
                sentences.push(Sentence { sent_id, text: t, paragraph_id, section: sec_id });
            }
            paragraphs.push(ids);
            paragraph_id += 1;
        }
        sections.push(Section { sec_id, heading, paragraphs });
    }

    if raw.references.is_empty() {
        return Err(Error::EmptyReferences(raw.paper_id));
    }
    let author_set: BTreeSet<String> = authors.iter().cloned().collect();
    let mut references = Vec::with_capacity(raw.references.len());
    let mut seen = BTreeSet::new();
    for (ri, r) in raw.references.into_iter().enumerate() {
        if r.cit_id == 0 {
            return Err(Error::parse(format!("references[{ri}].cit_id"), "must be positive"));
        }
        if !seen.insert(r.cit_id) {
            return Err(Error::parse(format!("references[{ri}].cit_id"), format!("duplicate cit_id {}", r.cit_id)));
        }
        let cit_author = normalize_author_list(&r.authors, &format!("references[{ri}].authors"))?;
        let ref_set: BTreeSet<String> = cit_author.iter().cloned().collect();
        references.push(ReferenceEntry {
            cit_id: r.cit_id,
            cit_title: text::normalize_whitespace(&r.title),
            cit_author,
            cit_year: r.year,
            n_cit: 0,
            au_overlap: author_overlap(&author_set, &ref_set),
        });
    }

    let (mentions, diagnostics) = match_citations(&sentences, &references);
    if options.strict {
        if let Some(d) = diagnostics.first() {
            return Err(Error::UnresolvedMarker {
                marker: d.marker.clone(),
                sent_id: d.sent_id,
                reason: d.reason.clone(),
            });
        }
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for m in &mentions {
        *counts.entry(m.cit_id).or_default() += 1;
    }
    for r in &mut references {
        r.n_cit = counts.get(&r.cit_id).copied().unwrap_or(0);
    }

    Ok(Ingested {
        paper: Paper {
            paper_id: raw.paper_id,
            title: text::normalize_whitespace(&raw.title),
            authors,
            author_shares,
            year: raw.year,
            sections,
            sentences,
            references,
            mentions,
        },
        diagnostics,
    })
}

fn normalize_author_list(names: &[String], element: &str) -> Result<Vec<String>> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let norm = normalize_author(n);
            if norm.is_empty() {
                Err(Error::parse(format!("{element}[{i}]"), "empty author name"))
            } else {
                Ok(norm)
            }
        })
        .collect()
}

// --- sections ---------------------------------------------------------------

const BACKGROUND_KEYWORDS: [&str; 4] = ["related work", "introduction", "background", "preliminar"];
const CLOSING_KEYWORDS: [&str; 5] = ["conclusion", "discussion", "future work", "acknowledg", "appendi"];

/// Maps a section heading to its category by case-insensitive keyword
/// substring match. Headings matching no keyword are main body.
pub fn classify_section(heading: &str) -> SectionKind {
    let h = heading.to_lowercase();
    if BACKGROUND_KEYWORDS.iter().any(|k| h.contains(k)) {
        SectionKind::Background
    } else if CLOSING_KEYWORDS.iter().any(|k| h.contains(k)) {
        SectionKind::Closing
    } else {
        SectionKind::MainBody
    }
}

// --- sentences --------------------------------------------------------------

const ABBREVIATIONS: [&str; 16] = [
    "al.", "e.g.", "i.e.", "fig.", "figs.", "eq.", "eqs.", "vs.", "cf.", "sec.", "no.", "resp.", "approx.", "dr.",
    "prof.", "ref.",
];

fn is_abbreviation(word: &str) -> bool {
    let trimmed = word.trim_start_matches(['(', '[', '"', '\'']);
    let lower = trimmed.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // Initials: "J." or "J.R."
    let mut chars = trimmed.chars().peekable();
    let mut saw_initial = false;
    while let Some(c) = chars.next() {
        if c.is_uppercase() && chars.next() == Some('.') {
            saw_initial = true;
        } else {
            return false;
        }
    }
    saw_initial
}

/// Splits normalized text into sentences.
///
/// A sentence ends at `.`, `!` or `?` followed by a space and a token that
/// starts with an uppercase letter, digit, quote or opening bracket. No split
/// happens inside brackets or parentheses, or after an abbreviation or an
/// initial. Joining the output with single spaces reproduces the input.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let text = text.trim();
    if text.is_empty() {
        return Vec::new();
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut depth = 0i32;
    let mut word_start = 0usize;
    for (k, &(pos, c)) in chars.iter().enumerate() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth = (depth - 1).max(0),
            ' ' => word_start = pos + 1,
            _ => {}
        }
        if depth > 0 || !matches!(c, '.' | '!' | '?') {
            continue;
        }
        // terminator must be followed by a space, then a sentence opener
        let Some(&(space_pos, ' ')) = chars.get(k + 1) else {
            continue;
        };
        let Some(&(_, next)) = chars.get(k + 2) else {
            continue;
        };
        let opener = next.is_uppercase() || next.is_ascii_digit() || matches!(next, '[' | '(' | '"' | '\'' | '“');
        if !opener {
            continue;
        }
        let word = &text[word_start..pos + c.len_utf8()];
        if c == '.' && is_abbreviation(word) {
            continue;
        }
        out.push(text[start..space_pos].to_string());
        start = space_pos + 1;
    }
    out.push(text[start..].to_string());
    out
}

// --- citation markers -------------------------------------------------------

fn numeric_marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\s*(\d+(?:\s*[-–—,;]\s*\d+)*)\s*\]").unwrap())
}

fn parenthetical_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(([^()]+)\)").unwrap())
}

fn author_year_part_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^(?P<first>(?:(?:van|von|de|der|den|del|da|di|du|le|la)\s+)*\p{Lu}[\p{L}'’-]*(?:\s+\p{Lu}[\p{L}'’-]*)*?)(?:\s+et\s+al\.?|\s+(?:and|&)\s+(?P<second>\p{Lu}[\p{L}'’-]*))?,?\s+(?P<year>\d{4})[a-z]?$",
        )
        .unwrap()
    })
}

fn narrative_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?P<first>\p{Lu}[\p{L}'’-]+)(?:\s+et\s+al\.?|\s+(?:and|&)\s+(?P<second>\p{Lu}[\p{L}'’-]+))?\s+\((?P<year>\d{4})[a-z]?\)",
        )
        .unwrap()
    })
}

/// Upper bound on the ids a single range marker may expand to.
const MAX_RANGE: u32 = 1000;

enum MarkerResolution {
    Ids(Vec<u32>),
    Unresolved(String),
}

fn expand_numeric(body: &str) -> std::result::Result<Vec<u32>, String> {
    let mut ids = Vec::new();
    for part in body.split([',', ';']) {
        let part = part.trim();
        let bounds: Vec<&str> = part.split(['-', '–', '—']).map(str::trim).collect();
        let parse = |s: &str| s.parse::<u32>().map_err(|_| format!("bad number {s:?}"));
        match bounds.as_slice() {
            [single] => ids.push(parse(single)?),
            [lo, hi] => {
                let (lo, hi) = (parse(lo)?, parse(hi)?);
                if lo > hi {
                    return Err(format!("descending range {lo}-{hi}"));
                }
                if hi - lo >= MAX_RANGE {
                    return Err(format!("range {lo}-{hi} too long"));
                }
                ids.extend(lo..=hi);
            }
            _ => return Err(format!("malformed range {part:?}")),
        }
    }
    Ok(ids)
}

fn surname_key(name: &str) -> String {
    name.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

fn resolve_author_year(
    first: &str,
    second: Option<&str>,
    year: i32,
    references: &[ReferenceEntry],
) -> std::result::Result<u32, String> {
    // multi-word surnames ("van Dijk") match on their last word
    let first_key = surname_key(first.split_whitespace().last().unwrap_or(first));
    let surname_of = |n: &String| n.split(' ').next_back().unwrap_or("").to_string();
    let mut candidates: Vec<&ReferenceEntry> = references
        .iter()
        .filter(|r| r.cit_year == year && r.cit_author.first().map(surname_of).as_deref() == Some(first_key.as_str()))
        .collect();
    if candidates.len() > 1 {
        if let Some(second) = second {
            let key = surname_key(second);
            candidates.retain(|r| r.cit_author.get(1).map(surname_of).as_deref() == Some(key.as_str()));
        }
    }
    match candidates.as_slice() {
        [one] => Ok(one.cit_id),
        [] => Err("no reference with that first author and year".into()),
        _ => Err("ambiguous author-year marker".into()),
    }
}

/// Finds every citation marker of `sentence` in textual order.
fn scan_markers(sentence: &str, references: &[ReferenceEntry]) -> Vec<(usize, String, MarkerResolution)> {
    let known: BTreeSet<u32> = references.iter().map(|r| r.cit_id).collect();
    let mut found = Vec::new();

    for cap in numeric_marker_re().captures_iter(sentence) {
        let whole = cap.get(0).unwrap();
        let resolution = match expand_numeric(&cap[1]) {
            Err(reason) => MarkerResolution::Unresolved(reason),
            Ok(ids) => match ids.iter().find(|id| !known.contains(id)) {
                Some(missing) => MarkerResolution::Unresolved(format!("no reference numbered {missing}")),
                None => MarkerResolution::Ids(ids),
            },
        };
        found.push((whole.start(), whole.as_str().to_string(), resolution));
    }

    let mut narrative_spans = Vec::new();
    for cap in narrative_re().captures_iter(sentence) {
        let whole = cap.get(0).unwrap();
        narrative_spans.push(whole.range());
        let year: i32 = cap["year"].parse().unwrap();
        let resolution =
            match resolve_author_year(&cap["first"], cap.name("second").map(|m| m.as_str()), year, references) {
                Ok(id) => MarkerResolution::Ids(vec![id]),
                Err(reason) => MarkerResolution::Unresolved(reason),
            };
        found.push((whole.start(), whole.as_str().to_string(), resolution));
    }

    for cap in parenthetical_re().captures_iter(sentence) {
        let whole = cap.get(0).unwrap();
        if narrative_spans.iter().any(|r| r.contains(&whole.start())) {
            continue;
        }
        let parts: Vec<&str> = cap[1].split(';').map(str::trim).collect();
        let parsed: Vec<_> = parts.iter().filter_map(|p| author_year_part_re().captures(p)).collect();
        if parsed.is_empty() {
            // ordinary parenthetical remark
            continue;
        }
        let mut ids = Vec::new();
        let mut failure = None;
        for (p, c) in parts.iter().zip(parts.iter().map(|p| author_year_part_re().captures(p))) {
            let Some(c) = c else {
                failure = Some(format!("unrecognized citation {p:?}"));
                break;
            };
            let year: i32 = c["year"].parse().unwrap();
            match resolve_author_year(&c["first"], c.name("second").map(|m| m.as_str()), year, references) {
                Ok(id) => ids.push(id),
                Err(reason) => {
                    failure = Some(format!("{p:?}: {reason}"));
                    break;
                }
            }
        }
        let resolution = match failure {
            Some(reason) => MarkerResolution::Unresolved(reason),
            None => MarkerResolution::Ids(ids),
        };
        found.push((whole.start(), whole.as_str().to_string(), resolution));
    }

    found.sort_by_key(|(start, _, _)| *start);
    found
}

/// Resolves the citation markers of every sentence.
///
/// Numeric markers (`[3]`, `[1,2]`, `[2-4]`) and author-year markers
/// (`(Smith et al., 2020; Lee, 2019)`, `Smith and Lee (2020)`) are
/// supported. A marker naming m references yields m mentions that share the
/// sentence. Markers that do not resolve are reported as diagnostics and
/// produce no mention.
pub fn match_citations(
    sentences: &[Sentence],
    references: &[ReferenceEntry],
) -> (Vec<CitationMention>, Vec<Diagnostic>) {
    let mut mentions = Vec::new();
    let mut diagnostics = Vec::new();
    for s in sentences {
        for (_, marker, resolution) in scan_markers(&s.text, references) {
            match resolution {
                MarkerResolution::Ids(ids) => {
                    for cit_id in ids {
                        mentions.push(CitationMention {
                            cit_id,
                            sent_id: s.sent_id,
                            sec_id: s.section,
                            cit_text: s.text.clone(),
                            context_a: String::new(),
                            context_b: String::new(),
                            sen_label: Sentiment::Neutral,
                            cit_word: text::word_count(&s.text),
                        });
                    }
                }
                MarkerResolution::Unresolved(reason) => {
                    diagnostics.push(Diagnostic { sent_id: s.sent_id, marker, reason })
                }
            }
        }
    }
    (mentions, diagnostics)
}

// --- authors ----------------------------------------------------------------

/// Normalizes an author name to lowercase `"<given initials> <surname>"`,
/// e.g. `"Smith, John A."` and `"John A. Smith"` both become `"ja smith"`.
pub fn normalize_author(name: &str) -> String {
    let reordered = match name.split_once(',') {
        Some((surname, given)) if !given.trim().is_empty() => format!("{} {}", given, surname),
        Some((surname, _)) => surname.to_string(),
        None => name.to_string(),
    };
    let words: Vec<String> = reordered
        .split(|c: char| c.is_whitespace() || c == '.' || c == '-')
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect();
    match words.split_last() {
        None => String::new(),
        Some((surname, [])) => surname.clone(),
        Some((surname, given)) => {
            let initials: String = given.iter().filter_map(|w| w.chars().next()).collect();
            format!("{initials} {surname}")
        }
    }
}

/// `2·|A∩B| / (|A|+|B|)`, and 0 when both sets are empty.
pub fn author_overlap(citing: &BTreeSet<String>, cited: &BTreeSet<String>) -> f64 {
    let total = citing.len() + cited.len();
    if total == 0 {
        return 0.0;
    }
    2.0 * citing.intersection(cited).count() as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn doc(body: &str, n_refs: u32) -> String {
        let refs: Vec<String> = (1..=n_refs)
            .map(|i| format!(r#"{{"cit_id": {i}, "title": "Ref {i}", "authors": ["Author {i}"], "year": 2000}}"#))
            .collect();
        format!(
            r#"{{"paper_id": "t1", "title": "T", "authors": ["Ann Lee"], "year": 2020,
                "sections": [{{"heading": "Method", "paragraphs": [{}]}}],
                "references": [{}]}}"#,
            serde_json::to_string(body).unwrap(),
            refs.join(",")
        )
    }

    #[test]
    fn minimal_document() {
        let ing = parse_paper(&doc("We use X [1]. It works.", 1), ParseOptions::default()).unwrap();
        assert_eq!(ing.paper.sentences.len(), 2);
        assert_eq!(ing.paper.mentions.len(), 1);
        assert_eq!(ing.paper.references[0].n_cit, 1);
        assert!(ing.diagnostics.is_empty());
    }

    #[test]
    fn repeated_citation_counts() {
        let ing = parse_paper(&doc("A uses [3]. B extends [3] too. C [1].", 3), ParseOptions::default()).unwrap();
        let r3 = ing.paper.reference(3).unwrap();
        let by_scan = ing.paper.mentions.iter().filter(|m| m.cit_id == 3).count();
        assert_eq!(by_scan, 2);
        assert_eq!(r3.n_cit, 2);
        assert_eq!(ing.paper.reference(2).unwrap().n_cit, 0);
    }

    #[test]
    fn dangling_marker_strict_is_error() {
        let body = "We cite [9] here.";
        let err = parse_paper(&doc(body, 8), ParseOptions { strict: true }).unwrap_err();
        assert!(matches!(err, Error::UnresolvedMarker { ref marker, .. } if marker == "[9]"), "{err}");
        let ing = parse_paper(&doc(body, 8), ParseOptions::default()).unwrap();
        assert_eq!(ing.diagnostics.len(), 1);
        assert!(ing.paper.mentions.is_empty());
    }

    #[test]
    fn empty_references_error() {
        let json = r#"{"paper_id": "x", "title": "T", "authors": [], "year": 2020,
            "sections": [{"heading": "Intro", "paragraphs": ["Hello."]}], "references": []}"#;
        assert!(matches!(parse_paper(json, ParseOptions::default()), Err(Error::EmptyReferences(_))));
    }

    #[test]
    fn malformed_names_element() {
        let json = r#"{"paper_id": "x", "title": "T", "authors": [], "year": 2020,
            "sections": [{"heading": "Intro", "paragraphs": [42]}], "references": []}"#;
        match parse_paper(json, ParseOptions::default()) {
            Err(Error::Parse { element, .. }) => assert_eq!(element, "sections[0].paragraphs[0]"),
            other => panic!("{other:?}"),
        }
        let json = r#"{"paper_id": "x", "title": "T", "authors": [], "year": 2020,
            "sections": [{"heading": "  ", "paragraphs": ["a."]}], "references": []}"#;
        match parse_paper(json, ParseOptions::default()) {
            Err(Error::Parse { element, .. }) => assert_eq!(element, "sections[0].heading"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn section_keywords() {
        assert_eq!(classify_section("Related Work"), SectionKind::Background);
        assert_eq!(classify_section("1 Introduction"), SectionKind::Background);
        assert_eq!(classify_section("Methodology"), SectionKind::MainBody);
        assert_eq!(classify_section("Experiments"), SectionKind::MainBody);
        assert_eq!(classify_section("Acknowledgements"), SectionKind::Closing);
        assert_eq!(classify_section("Acknowledgments"), SectionKind::Closing);
        assert_eq!(classify_section("CONCLUSIONS"), SectionKind::Closing);
    }

    #[test]
    fn segmentation() {
        assert_eq!(segment_sentences("A is good. B is bad."), ["A is good.", "B is bad."]);
        assert_eq!(segment_sentences("Smith et al. [3] show X."), ["Smith et al. [3] show X."]);
        assert!(segment_sentences("").is_empty());
        assert_eq!(
            segment_sentences("See Fig. 2 and Eq. 3. J. R. Smith agrees (cf. Ref. 4. Next). Done!"),
            ["See Fig. 2 and Eq. 3.", "J. R. Smith agrees (cf. Ref. 4. Next).", "Done!"]
        );
        assert_eq!(segment_sentences("e.g. this. and lower. Upper"), ["e.g. this. and lower.", "Upper"]);
    }

    #[test]
    fn marker_expansion() {
        let refs: Vec<ReferenceEntry> = (1..=5)
            .map(|i| ReferenceEntry {
                cit_id: i,
                cit_title: String::new(),
                cit_author: vec![],
                cit_year: 2000,
                n_cit: 0,
                au_overlap: 0.0,
            })
            .collect();
        let sent = |t: &str| Sentence { sent_id: 0, text: t.into(), paragraph_id: 0, section: SectionKind::MainBody };
        let (m, d) = match_citations(&[sent("X [1,2] improves Y.")], &refs);
        assert_eq!(m.iter().map(|m| m.cit_id).collect::<Vec<_>>(), [1, 2]);
        assert!(m.iter().all(|m| m.sent_id == 0));
        assert!(d.is_empty());
        let (m, _) = match_citations(&[sent("No markers here.")], &refs);
        assert!(m.is_empty());
        let (m, _) = match_citations(&[sent("Range [2-4] and [5].")], &refs);
        assert_eq!(m.iter().map(|m| m.cit_id).collect::<Vec<_>>(), [2, 3, 4, 5]);
        let (m, d) = match_citations(&[sent("Bad [4-2] and [1, 7].")], &refs);
        assert!(m.is_empty());
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn author_year_markers() {
        let mk = |id, authors: &[&str], year| ReferenceEntry {
            cit_id: id,
            cit_title: String::new(),
            cit_author: authors.iter().map(|a| normalize_author(a)).collect(),
            cit_year: year,
            n_cit: 0,
            au_overlap: 0.0,
        };
        let refs = vec![
            mk(1, &["Jane Smith", "Tom Lee"], 2020),
            mk(2, &["Jane Smith", "Ann Kay"], 2020),
            mk(3, &["Rui van Dijk"], 2018),
        ];
        let sent = |t: &str| Sentence { sent_id: 4, text: t.into(), paragraph_id: 0, section: SectionKind::Background };
        let (m, d) = match_citations(&[sent("Prior work (Smith and Kay, 2020; van Dijk, 2018) agrees.")], &refs);
        assert_eq!(m.iter().map(|m| m.cit_id).collect::<Vec<_>>(), [2, 3]);
        assert!(d.is_empty());
        let (m, d) = match_citations(&[sent("Smith et al. (2020) is ambiguous (see above).")], &refs);
        assert!(m.is_empty());
        assert_eq!(d.len(), 1);
        let (m, d) = match_citations(&[sent("Dijk (2018) shows it (Okafor, 2011).")], &refs);
        assert_eq!(m.len(), 1);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn author_names() {
        assert_eq!(normalize_author("John A. Smith"), "ja smith");
        assert_eq!(normalize_author("Smith, John A."), "ja smith");
        assert_eq!(normalize_author("  SMITH "), "smith");
        assert_eq!(normalize_author("Jean-Luc O'Neil"), "jl oneil");
        assert_eq!(normalize_author("..."), "");
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(author_overlap(&set(&["x", "y"]), &set(&["x", "y"])), 1.0);
        assert_eq!(author_overlap(&set(&["x"]), &set(&["y"])), 0.0);
        let v = author_overlap(&set(&["a", "b", "c"]), &set(&["b", "c", "d"]));
        assert!((v - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(author_overlap(&set(&[]), &set(&[])), 0.0);
    }

    #[test]
    fn author_shares_validation() {
        let base = |shares: &str| {
            format!(
                r#"{{"paper_id": "x", "title": "T", "authors": ["A B", "C D"], "author_shares": {shares}, "year": 2020,
                "sections": [{{"heading": "Intro", "paragraphs": ["Hi [1]."]}}],
                "references": [{{"cit_id": 1, "title": "R", "authors": [], "year": 1}}]}}"#
            )
        };
        let ok = parse_paper(&base("[0.25, 0.75]"), ParseOptions::default()).unwrap();
        assert_eq!(ok.paper.author_shares, [0.25, 0.75]);
        assert!(parse_paper(&base("[0.5, 0.6]"), ParseOptions::default()).is_err());
        assert!(parse_paper(&base("[1.0]"), ParseOptions::default()).is_err());
    }
}
