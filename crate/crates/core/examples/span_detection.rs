//! Trains the citation-span detector on synthetic sentences, cross-validates
//! it and labels one sentence.

use citation_influence::span::{cross_validate, label_span, train_span, AnnotatedToken, SpanTrainConfig};
use citation_influence::synth;

fn main() -> citation_influence::Result<()> {
    let data = synth::span_corpus(300, 0.1, 5);
    let config = SpanTrainConfig::default();
    let cv = cross_validate(&data, 10, 5, |fold| train_span(fold, &config))?;
    println!("10-fold CV: P {:.3} R {:.3} F1 {:.3}", cv.precision, cv.recall, cv.f1);

    let model = train_span(&data, &config)?;
    let words = "sparse models [4] improve recall on long documents , but dense retrievers remain faster";
    let tokens: Vec<AnnotatedToken> = words.split(' ').enumerate().map(|(i, w)| AnnotatedToken::plain(i, w)).collect();
    let inside = label_span(&model, &tokens, 2)?;
    let span: Vec<&str> = tokens.iter().zip(&inside).filter(|(_, &y)| y).map(|(t, _)| t.text.as_str()).collect();
    println!("span of [4]: {}", span.join(" "));
    Ok(())
}
