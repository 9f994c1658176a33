//! LambdaMART: gradient-boosted regression trees fitted to pairwise lambda
//! gradients weighted by the NDCG change of swapping each pair.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ndcg::{discount, gain, ideal_dcg, order_by_score};
use super::tree::{fit_tree, Row, TreeParams};
use super::GbdtEnsemble;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaMartConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    /// Steepness of the pairwise logistic.
    pub sigma: f64,
    /// Fraction of rows drawn (without replacement) for each tree.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for LambdaMartConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 2,
            sigma: 1.0,
            subsample: 1.0,
            seed: 0,
        }
    }
}

/// One ranking query: the feature rows of a paper's citation occurrences
/// and their relevance labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingQuery {
    pub rows: Vec<Row>,
    pub labels: Vec<u8>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    /// Mean pairwise logistic loss before training (index 0) and after each
    /// boosting round.
    pub pairwise_loss: Vec<f64>,
    /// Fraction of mis-ordered labelled pairs, indexed like `pairwise_loss`.
    pub misordered: Vec<f64>,
    /// Step multiplier kept for each tree after backtracking.
    pub step_scale: Vec<f64>,
}

/// Fraction of labelled pairs `l_i > l_j` with `s_i <= s_j`; 0 without
/// pairs.
pub fn pairwise_error(queries: &[RankingQuery], scores: &[Vec<f64>]) -> f64 {
    let mut total = 0u64;
    let mut wrong = 0u64;
    for (q, s) in queries.iter().zip(scores) {
        for i in 0..q.labels.len() {
            for j in 0..q.labels.len() {
                if q.labels[i] > q.labels[j] {
                    total += 1;
                    if s[i] <= s[j] {
                        wrong += 1;
                    }
                }
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        wrong as f64 / total as f64
    }
}

/// Mean pairwise logistic loss `log(1 + exp(-σ(s_i - s_j)))` over labelled
/// pairs with `l_i > l_j`; 0 without pairs.
pub fn pairwise_loss(queries: &[RankingQuery], scores: &[Vec<f64>], sigma: f64) -> f64 {
    let mut total = 0u64;
    let mut loss = 0.0;
    for (q, s) in queries.iter().zip(scores) {
        for i in 0..q.labels.len() {
            for j in 0..q.labels.len() {
                if q.labels[i] > q.labels[j] {
                    total += 1;
                    let z = -sigma * (s[i] - s[j]);
                    loss += if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
                }
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        loss / total as f64
    }
}

/// Accumulates lambdas and second-order weights for one query.
fn query_lambdas(q: &RankingQuery, scores: &[f64], sigma: f64, lambdas: &mut [f64], weights: &mut [f64]) {
    let ideal = ideal_dcg(&q.labels);
    if ideal == 0.0 {
        return;
    }
    let order = order_by_score(scores);
    let mut position = vec![0usize; order.len()];
    for (pos, &item) in order.iter().enumerate() {
        position[item] = pos;
    }
    let n = q.labels.len();
    for i in 0..n {
        for j in 0..n {
            if q.labels[i] <= q.labels[j] {
                continue;
            }
            let delta = ((gain(q.labels[i]) - gain(q.labels[j])) * (discount(position[i]) - discount(position[j])))
                .abs()
                / ideal;
            let rho = 1.0 / (1.0 + (sigma * (scores[i] - scores[j])).exp());
            let lambda = sigma * rho * delta;
            let w = sigma * sigma * rho * (1.0 - rho) * delta;
            lambdas[i] += lambda;
            lambdas[j] -= lambda;
            weights[i] += w;
            weights[j] += w;
        }
    }
}

/// Halvings tried before a round that would raise the pairwise error is
/// dropped.
const MAX_BACKTRACK: u32 = 10;

/// Trains a LambdaMART ensemble.
///
/// Each round's tree is accepted only if it does not raise the pairwise
/// logistic training loss; otherwise its step is halved until it does not, and a
/// round that cannot be repaired contributes nothing. Pairs with equal labels
/// carry no lambda. Queries with fewer than two rows are rejected.
pub fn train_lambdamart(queries: &[RankingQuery], config: &LambdaMartConfig) -> Result<(GbdtEnsemble, TrainingTrace)> {
    if config.n_trees == 0 {
        return Err(Error::invalid("n_trees must be positive"));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::invalid(format!("learning_rate must be positive, got {}", config.learning_rate)));
    }
    if config.max_depth == 0 || config.min_samples_leaf == 0 {
        return Err(Error::invalid("max_depth and min_samples_leaf must be positive"));
    }
    if !(config.subsample > 0.0 && config.subsample <= 1.0) {
        return Err(Error::invalid("subsample must be in (0, 1]"));
    }
    if queries.is_empty() {
        return Err(Error::invalid("no training queries"));
    }
    for (k, q) in queries.iter().enumerate() {
        if q.rows.len() != q.labels.len() {
            return Err(Error::invalid(format!("query {k}: rows and labels differ in length")));
        }
        if q.rows.len() < 2 {
            return Err(Error::invalid(format!("query {k}: needs at least two rows")));
        }
        if q.labels.iter().any(|&l| l > 3) {
            return Err(Error::invalid(format!("query {k}: relevance labels must be in 0..=3")));
        }
        if q.rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("query {k}: non-finite feature")));
        }
    }

    let rows: Vec<Row> = queries.iter().flat_map(|q| q.rows.iter().copied()).collect();
    let offsets: Vec<usize> = queries
        .iter()
        .scan(0, |acc, q| {
            let start = *acc;
            *acc += q.rows.len();
            Some(start)
        })
        .collect();
    let n = rows.len();
    let params = TreeParams { max_depth: config.max_depth, min_samples_leaf: config.min_samples_leaf };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut scores = vec![0.0; n];
    let split_scores = |scores: &[f64]| -> Vec<Vec<f64>> {
        queries.iter().zip(&offsets).map(|(q, &o)| scores[o..o + q.rows.len()].to_vec()).collect()
    };

    let mut ensemble = GbdtEnsemble { learning_rate: config.learning_rate, trees: Vec::with_capacity(config.n_trees) };
    let mut trace = TrainingTrace::default();
    let mut current_loss = pairwise_loss(queries, &split_scores(&scores), config.sigma);
    trace.pairwise_loss.push(current_loss);
    trace.misordered.push(pairwise_error(queries, &split_scores(&scores)));

    for _ in 0..config.n_trees {
        let mut lambdas = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for (q, &o) in queries.iter().zip(&offsets) {
            let len = q.rows.len();
            query_lambdas(q, &scores[o..o + len], config.sigma, &mut lambdas[o..o + len], &mut weights[o..o + len]);
        }
        let sample_idx: Vec<usize> = if config.subsample < 1.0 {
            let k = ((n as f64 * config.subsample).round() as usize).clamp(1, n);
            let mut s = sample(&mut rng, n, k).into_vec();
            s.sort_unstable();
            s
        } else {
            (0..n).collect()
        };
        let mut tree = fit_tree(&rows, &lambdas, &weights, &sample_idx, params);
        let deltas: Vec<f64> = rows.iter().map(|r| config.learning_rate * tree.predict(r)).collect();

        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_BACKTRACK {
            let trial: Vec<f64> = scores.iter().zip(&deltas).map(|(s, d)| s + scale * d).collect();
            let loss = pairwise_loss(queries, &split_scores(&trial), config.sigma);
            if loss <= current_loss {
                scores = trial;
                current_loss = loss;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            scale = 0.0;
        }
        if scale != 1.0 {
            tree.scale_leaves(scale);
        }
        ensemble.trees.push(tree);
        trace.pairwise_loss.push(current_loss);
        trace.misordered.push(pairwise_error(queries, &split_scores(&scores)));
        trace.step_scale.push(scale);
    }
    Ok((ensemble, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> LambdaMartConfig {
        LambdaMartConfig { n_trees: 10, min_samples_leaf: 1, ..Default::default() }
    }

    #[test]
    fn two_rows_order_by_label() {
        let q = RankingQuery { rows: vec![[0.0, 5.0, 40.0, 1.0], [0.0, 1.0, 10.0, 0.0]], labels: vec![3, 0] };
        let (m, _) = train_lambdamart(std::slice::from_ref(&q), &small()).unwrap();
        assert!(m.score_row(&q.rows[0]) > m.score_row(&q.rows[1]));
    }

    #[test]
    fn constant_labels_give_constant_scores() {
        let q = RankingQuery {
            rows: vec![[0.0, 5.0, 40.0, 1.0], [0.5, 1.0, 10.0, 0.0], [0.1, 2.0, 3.0, -1.0]],
            labels: vec![2, 2, 2],
        };
        let (m, trace) = train_lambdamart(std::slice::from_ref(&q), &small()).unwrap();
        assert!(q.rows.iter().all(|r| m.score_row(r) == 0.0));
        assert!(trace.pairwise_loss.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn rejects_bad_config_and_queries() {
        let q = RankingQuery { rows: vec![[0.0; 4], [1.0; 4]], labels: vec![1, 0] };
        let bad = |c: LambdaMartConfig| train_lambdamart(std::slice::from_ref(&q), &c).is_err();
        assert!(bad(LambdaMartConfig { n_trees: 0, ..small() }));
        assert!(bad(LambdaMartConfig { learning_rate: 0.0, ..small() }));
        assert!(bad(LambdaMartConfig { learning_rate: -1.0, ..small() }));
        let single = RankingQuery { rows: vec![[0.0; 4]], labels: vec![1] };
        assert!(train_lambdamart(&[single], &small()).is_err());
    }

    #[test]
    fn seeded_subsampling_is_deterministic() {
        let data = crate::synth::ranking_dataset(20, 0.5, 5);
        let cfg = LambdaMartConfig { n_trees: 15, subsample: 0.7, seed: 9, ..Default::default() };
        let (a, ta) = train_lambdamart(&data, &cfg).unwrap();
        let (b, tb) = train_lambdamart(&data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        assert!(ta.pairwise_loss.windows(2).all(|w| w[1] <= w[0]));
    }
}
