//! Shared text utilities: whitespace normalization, the word tokenizer used
//! for `cit_word` and sentiment features, and content-word extraction for the
//! lexical relatedness test.

use std::collections::BTreeSet;

/// Collapses every whitespace run to a single ASCII space and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits on whitespace, keeps only alphanumeric characters of each piece
/// (lowercased) and drops pieces that end up empty.
///
/// This is the single tokenizer of the crate: `cit_word` counts its output
/// and the sentiment model uses it as its bag of words.
pub fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let tok: String = raw.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect();
            (!tok.is_empty()).then_some(tok)
        })
        .collect()
}

/// Number of tokens produced by [`tokens`].
pub fn word_count(text: &str) -> usize {
    tokens(text).len()
}

/// 150 common English function words.
pub const STOP_WORDS: [&str; 150] = [
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "either",
    "et",
    "al",
    "etc",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "however",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "may",
    "me",
    "might",
    "more",
    "most",
    "much",
    "must",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "one",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "shall",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "thus",
    "to",
    "too",
    "under",
    "until",
    "up",
    "upon",
    "us",
    "very",
    "via",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "whereas",
    "whether",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "within",
    "would",
    "yet",
    "you",
    "your",
    "yours",
    "e",
    "g",
    "ie",
    "eg",
    "fig",
    "eq",
];

pub fn is_stop_word(token: &str) -> bool {
    STOP_WORDS.contains(&token)
}

/// Suffix stripping for `ing`, `ed`, `es`, `s`, keeping a stem of at least
/// three characters.
pub fn stem(token: &str) -> &str {
    for suffix in ["ing", "ed", "es", "s"] {
        if let Some(base) = token.strip_suffix(suffix) {
            if base.chars().count() >= 3 {
                return base;
            }
        }
    }
    token
}

/// Stems of the non-stop-word, non-numeric tokens of `text`.
pub fn content_stems(text: &str) -> BTreeSet<String> {
    tokens(text)
        .iter()
        .filter(|t| !is_stop_word(t) && !t.chars().all(|c| c.is_ascii_digit()))
        .map(|t| stem(t).to_string())
        .collect()
}

/// Jaccard similarity of two sets; 0 when both are empty.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_list_has_no_duplicates() {
        let set: BTreeSet<_> = STOP_WORDS.iter().collect();
        assert_eq!(set.len(), STOP_WORDS.len());
    }

    #[test]
    fn tokens_strip_punctuation() {
        assert_eq!(tokens("Smith et al. [3] show X."), ["smith", "et", "al", "3", "show", "x"]);
        assert_eq!(tokens(" -- ; "), Vec::<String>::new());
    }

    #[test]
    fn stemming() {
        assert_eq!(stem("layers"), "layer");
        assert_eq!(stem("uses"), "use");
        assert_eq!(stem("training"), "train");
        assert_eq!(stem("improved"), "improv");
        assert_eq!(stem("is"), "is");
    }

    #[test]
    fn normalize() {
        assert_eq!(normalize_whitespace("  a \n\t b  "), "a b");
    }
}
