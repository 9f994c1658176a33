//! Citation sentiment with the bundled seed model and with a model trained
//! on a small custom corpus.

use citation_influence::document::Sentiment;
use citation_influence::sentiment::{train_sentiment, SentimentModel};

fn main() -> citation_influence::Result<()> {
    let seed = SentimentModel::seed();
    for text in [
        "The approach of [3] suffers from severe overfitting.",
        "We adopt the encoders of [5] for all experiments.",
        "The elegant method of [2] gives strong improvements.",
    ] {
        println!("{:>8?}  {text}", seed.classify(text));
    }

    let corpus = [
        ("robust and accurate", Sentiment::Positive),
        ("brittle and slow", Sentiment::Negative),
        ("implemented in rust", Sentiment::Neutral),
    ];
    let custom = train_sentiment(&corpus, 1.0)?;
    let probe = "an accurate but slow parser";
    println!("custom model on {probe:?}: {:?} {:?}", custom.classify(probe), custom.log_posterior(probe));
    println!("priors {:?}", custom.class_priors);
    Ok(())
}
