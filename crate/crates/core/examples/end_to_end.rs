//! Runs the whole pipeline on the bundled toy corpus in a temporary store and
//! prints the influence tables.

use std::fs;
use std::path::Path;

use citation_influence::document::ParseOptions;
use citation_influence::influence::PropagationParams;
use citation_influence::pipeline::ContributionModel;
use citation_influence::ranker::LambdaMartConfig;
use citation_influence::sentiment::SentimentModel;
use citation_influence::store::{format_author_rows, format_paper_rows, CorpusStore, ModelKind};

fn main() -> citation_influence::Result<()> {
    let root = std::env::temp_dir().join(format!("citinf-example-{}", std::process::id()));
    let store = CorpusStore::open(&root)?;

    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    let mut files: Vec<_> = fs::read_dir(&toy).expect("toy corpus").filter_map(|e| e.ok()).map(|e| e.path()).collect();
    files.sort();
    for f in &files {
        store.ingest(&fs::read_to_string(f).expect("readable"), ParseOptions::default(), true)?;
    }
    store.put_model(ModelKind::Sentiment, &SentimentModel::seed().to_text())?;
    store.put_model(ModelKind::Classifier, &ContributionModel::Bootstrap.to_text())?;
    let trace = store.train_ranker(&LambdaMartConfig::default())?;
    println!("ranker trained, pairwise loss {:.4}", trace.pairwise_loss.last().unwrap());

    for id in store.paper_ids()? {
        store.run_pipeline(&id)?;
    }
    let report = store.propagate(&PropagationParams::default())?;
    print!("{}\n{}", format_paper_rows(&report.papers), format_author_rows(&report.authors));
    println!("store digest {}", store.digest()?);

    fs::remove_dir_all(&root).ok();
    Ok(())
}
