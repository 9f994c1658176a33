//! Citation context extraction.
//!
//! Starting from a citing sentence, neighbouring sentences are tested one by
//! one for relatedness to it, moving outward. The walk stops at the first
//! "irrelevant" verdict or at the paragraph boundary, so a context is always
//! a contiguous run of sentences from the same paragraph.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::document::Sentence;
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelatednessLabel {
    Related,
    Irrelevant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelatednessVerdict {
    pub label: RelatednessLabel,
    pub confidence: f64,
}

impl RelatednessVerdict {
    pub fn related(confidence: f64) -> Self {
        Self { label: RelatednessLabel::Related, confidence: confidence.clamp(0.0, 1.0) }
    }

    pub fn irrelevant(confidence: f64) -> Self {
        Self { label: RelatednessLabel::Irrelevant, confidence: confidence.clamp(0.0, 1.0) }
    }

    pub fn is_related(&self) -> bool {
        self.label == RelatednessLabel::Related
    }
}

/// Sentence-pair relatedness test. Implementations must be deterministic.
pub trait Relatedness {
    fn verdict(&self, candidate: &str, citing: &str) -> RelatednessVerdict;
}

impl<F> Relatedness for F
where
    F: Fn(&str, &str) -> RelatednessVerdict,
{
    fn verdict(&self, candidate: &str, citing: &str) -> RelatednessVerdict {
        self(candidate, citing)
    }
}

pub const DEFAULT_TAU: f64 = 0.12;

/// Lexical relatedness: Jaccard similarity of the content-word stems of the
/// two sentences, related when the similarity reaches `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexicalRelatedness {
    pub tau: f64,
}

impl Default for LexicalRelatedness {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU }
    }
}

impl LexicalRelatedness {
    pub fn similarity(&self, s1: &str, s2: &str) -> f64 {
        text::jaccard(&text::content_stems(s1), &text::content_stems(s2))
    }
}

impl Relatedness for LexicalRelatedness {
    fn verdict(&self, candidate: &str, citing: &str) -> RelatednessVerdict {
        let sim = self.similarity(candidate, citing);
        if sim >= self.tau {
            RelatednessVerdict::related(sim)
        } else {
            RelatednessVerdict::irrelevant(1.0 - sim)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Backward,
    Forward,
}

/// Options for the outward walk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextOptions {
    /// Largest distance from the citing sentence that may be included.
    pub max_span: Option<usize>,
}

/// Index range (into `sentences`) of the context on one side of `sent_id`.
///
/// Panics if `sent_id` is out of range.
pub fn context_span<R: Relatedness + ?Sized>(
    sentences: &[Sentence],
    sent_id: usize,
    direction: Direction,
    relatedness: &R,
    options: ContextOptions,
) -> Range<usize> {
    let citing = &sentences[sent_id];
    let mut accepted = 0usize;
    for i in 1.. {
        if options.max_span.is_some_and(|cap| i > cap) {
            break;
        }
        let idx = match direction {
            Direction::Backward => match sent_id.checked_sub(i) {
                Some(idx) => idx,
                None => break,
            },
            Direction::Forward => sent_id + i,
        };
        let Some(candidate) = sentences.get(idx) else {
            break;
        };
        if candidate.paragraph_id != citing.paragraph_id {
            break;
        }
        if !relatedness.verdict(&candidate.text, &citing.text).is_related() {
            break;
        }
        accepted = i;
    }
    match direction {
        Direction::Backward => sent_id - accepted..sent_id,
        Direction::Forward => sent_id + 1..sent_id + 1 + accepted,
    }
}

/// Context text on one side of the citing sentence: the accepted sentences in
/// document order, joined with single spaces. Empty when nothing qualifies.
pub fn extract_context<R: Relatedness + ?Sized>(
    sentences: &[Sentence],
    sent_id: usize,
    direction: Direction,
    relatedness: &R,
    options: ContextOptions,
) -> String {
    let span = context_span(sentences, sent_id, direction, relatedness, options);
    sentences[span].iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::SectionKind;

    fn sentences(paragraphs: &[usize]) -> Vec<Sentence> {
        paragraphs
            .iter()
            .enumerate()
            .map(|(i, &p)| Sentence {
                sent_id: i,
                text: format!("s{i}"),
                paragraph_id: p,
                section: SectionKind::MainBody,
            })
            .collect()
    }

    fn always(_: &str, _: &str) -> RelatednessVerdict {
        RelatednessVerdict::related(1.0)
    }

    fn never(_: &str, _: &str) -> RelatednessVerdict {
        RelatednessVerdict::irrelevant(1.0)
    }

    #[test]
    fn lexical_examples() {
        let lex = LexicalRelatedness::default();
        let s = "attention layers dominate";
        assert!(lex.verdict(s, s).is_related());
        assert!(!lex.verdict("cats purr loudly", "graphs converge quickly").is_related());
        // {model, use, attention, layer} vs {attention, layer, improve, model}: 3/5
        let sim = lex.similarity("the model uses attention layers", "attention layers improve the model");
        assert!((sim - 0.6).abs() < 1e-12, "{sim}");
        assert!(lex.verdict("the model uses attention layers", "attention layers improve the model").is_related());
    }

    #[test]
    fn first_in_paragraph_has_no_backward_context() {
        let s = sentences(&[0, 1, 1, 1]);
        assert_eq!(extract_context(&s, 1, Direction::Backward, &always, ContextOptions::default()), "");
    }

    #[test]
    fn irrelevant_stub_gives_empty_contexts() {
        let s = sentences(&[0, 0, 0, 0]);
        assert_eq!(extract_context(&s, 2, Direction::Backward, &never, ContextOptions::default()), "");
        assert_eq!(extract_context(&s, 2, Direction::Forward, &never, ContextOptions::default()), "");
    }

    #[test]
    fn related_stub_spans_paragraph() {
        // paragraph 1 holds sentences 4..=9
        let s = sentences(&[0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2]);
        let opts = ContextOptions::default();
        assert_eq!(extract_context(&s, 6, Direction::Backward, &always, opts), "s4 s5");
        assert_eq!(extract_context(&s, 6, Direction::Forward, &always, opts), "s7 s8 s9");
        let capped = ContextOptions { max_span: Some(2) };
        assert_eq!(extract_context(&s, 6, Direction::Forward, &always, capped), "s7 s8");
    }

    #[test]
    fn stops_at_first_irrelevant() {
        let s = sentences(&[0; 8]);
        // s2 is irrelevant to the citing sentence; s1 must not be reached
        let stub = |cand: &str, _: &str| {
            if cand == "s2" {
                RelatednessVerdict::irrelevant(0.9)
            } else {
                RelatednessVerdict::related(0.9)
            }
        };
        let span = context_span(&s, 4, Direction::Backward, &stub, ContextOptions::default());
        assert_eq!(span, 3..4);
    }
}
