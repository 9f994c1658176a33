//! Trains LambdaMART on synthetic queries, reports held-out NDCG and ranks
//! the references of one synthetic paper.

use citation_influence::influence::removal_invariance_check;
use citation_influence::ranker::ndcg::order_by_score;
use citation_influence::ranker::{ndcg, rank_references, train_lambdamart, LambdaMartConfig, ReferenceScorer};
use citation_influence::synth;

fn main() -> citation_influence::Result<()> {
    let queries = synth::ranking_dataset(200, 0.5, 42);
    let (train, test) = queries.split_at(160);
    let (model, trace) = train_lambdamart(train, &LambdaMartConfig::default())?;
    let held_out: f64 = test
        .iter()
        .map(|q| {
            let s: Vec<f64> = q.rows.iter().map(|r| model.score_row(r)).collect();
            ndcg(&order_by_score(&s), &q.labels)
        })
        .sum::<f64>()
        / test.len() as f64;
    println!(
        "{} trees, pairwise loss {:.4} -> {:.4}, held-out NDCG {held_out:.4}",
        model.trees.len(),
        trace.pairwise_loss[0],
        trace.pairwise_loss.last().unwrap()
    );

    let refs = synth::random_references(&mut synth::rng(7), 6);
    let scores = model.score_references(&refs)?;
    let scored: Vec<(u32, f64)> = refs.iter().map(|r| r.cit_id).zip(scores).collect();
    for r in rank_references(&scored)? {
        println!("  rank {} -> reference {} (score {:.3})", r.rank, r.cit_id, r.score);
    }
    println!("removal invariant: {}", removal_invariance_check(&refs, &model)?);
    Ok(())
}
