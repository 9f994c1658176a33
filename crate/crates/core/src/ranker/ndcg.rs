/// Gain of a relevance label: `2^label - 1`.
pub fn gain(label: u8) -> f64 {
    (2f64).powi(label as i32) - 1.0
}

/// Discount of a 0-based position: `1 / log2(position + 2)`.
pub fn discount(position: usize) -> f64 {
    1.0 / ((position + 2) as f64).log2()
}

/// DCG of labels listed in ranked order.
pub fn dcg<I: IntoIterator<Item = u8>>(ranked_labels: I) -> f64 {
    ranked_labels.into_iter().enumerate().map(|(pos, l)| gain(l) * discount(pos)).sum()
}

pub fn ideal_dcg(labels: &[u8]) -> f64 {
    let mut sorted = labels.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    dcg(sorted)
}

/// Full-list NDCG. `ranking[pos]` is the item placed at `pos`; `labels[item]`
/// its relevance. Returns 1 when the ideal DCG is 0.
pub fn ndcg(ranking: &[usize], labels: &[u8]) -> f64 {
    let ideal = ideal_dcg(labels);
    if ideal == 0.0 {
        return 1.0;
    }
    dcg(ranking.iter().map(|&i| labels[i])) / ideal
}

/// Items ordered by descending score, ties by ascending index.
pub fn order_by_score(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_is_one() {
        assert_eq!(ndcg(&[0, 1, 2], &[3, 2, 0]), 1.0);
    }

    #[test]
    fn all_zero_labels() {
        assert_eq!(ndcg(&[1, 0], &[0, 0]), 1.0);
    }

    #[test]
    fn reversed_pair() {
        // DCG = 1/log2(2) + 7/log2(3); ideal = 7 + 1/log2(3)
        let l3 = 3f64.log2();
        let expect = (1.0 + 7.0 / l3) / (7.0 + 1.0 / l3);
        let got = ndcg(&[1, 0], &[3, 1]);
        assert!((got - expect).abs() < 1e-15);
        assert!((got - 0.7098).abs() < 1e-4);
    }

    #[test]
    fn order_ties_by_index() {
        assert_eq!(order_by_score(&[0.5, 0.9, 0.5]), [1, 0, 2]);
    }
}
