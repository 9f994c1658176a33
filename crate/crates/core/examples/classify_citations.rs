//! Factor aggregation, the rule-based labeler and a Naive Bayes classifier
//! trained on synthetic labelled factors.

use citation_influence::classifier::{bootstrap_label, train_classifier, ContributionClass, FactorVector};
use citation_influence::document::{SectionKind, Sentiment};
use citation_influence::synth;

fn main() -> citation_influence::Result<()> {
    let data = synth::classifier_dataset(400, 1);
    let (train, test) = data.split_at(300);
    let model = train_classifier(train, 1.0)?;
    let correct = test.iter().filter(|(fv, c)| model.classify(fv) == *c).count();
    println!("held-out accuracy {correct}/{}", test.len());

    let fv = FactorVector {
        au_overlap: 0.0,
        sec_id: SectionKind::MainBody,
        n_cit: 2,
        cit_word: 40,
        sen_label: Sentiment::Neutral,
    };
    let post = model.posterior(&fv);
    for c in ContributionClass::ALL {
        println!("  P({c:?} | x) = {:.4}", post[c.code() as usize]);
    }
    println!("rule-based label: {:?}", bootstrap_label(&fv));
    Ok(())
}
