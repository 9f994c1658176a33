use serde::{Deserialize, Serialize};

pub const N_FEATURES: usize = 4;

pub type Row = [f64; N_FEATURES];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Regression tree with axis-aligned splits; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        Self { nodes: vec![Node::Leaf { value }] }
    }

    pub fn predict(&self, x: &Row) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right }
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn scale_leaves(&mut self, factor: f64) {
        for n in &mut self.nodes {
            if let Node::Leaf { value } = n {
                *value *= factor;
            }
        }
    }

    /// Checks that child indices are in range and point forward.
    pub fn is_well_formed(&self) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().enumerate().all(|(i, n)| match *n {
                Node::Leaf { value } => value.is_finite(),
                Node::Split { feature, threshold, left, right } => {
                    feature < N_FEATURES
                        && threshold.is_finite()
                        && left > i
                        && right > i
                        && left < self.nodes.len()
                        && right < self.nodes.len()
                }
            })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

/// Fits a tree to `targets` by least-squares splitting; each leaf predicts
/// the Newton step `Σ target / Σ weight` of its rows (0 when the weights
/// vanish).
pub fn fit_tree(
    rows: &[Row],
    targets: &[f64],
    weights: &[f64],
    sample: &[usize],
    params: TreeParams,
) -> RegressionTree {
    let mut tree = RegressionTree { nodes: Vec::new() };
    grow(&mut tree, rows, targets, weights, sample.to_vec(), 0, params);
    tree
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn grow(
    tree: &mut RegressionTree,
    rows: &[Row],
    targets: &[f64],
    weights: &[f64],
    idx: Vec<usize>,
    depth: usize,
    params: TreeParams,
) -> usize {
    let me = tree.nodes.len();
    tree.nodes.push(Node::Leaf { value: 0.0 });
    let split =
        if depth < params.max_depth { best_split(rows, targets, &idx, params.min_samples_leaf.max(1)) } else { None };
    match split {
        None => {
            let sum_t: f64 = idx.iter().map(|&i| targets[i]).sum();
            let sum_w: f64 = idx.iter().map(|&i| weights[i]).sum();
            let value = if sum_w > 1e-12 { sum_t / sum_w } else { 0.0 };
            tree.nodes[me] = Node::Leaf { value };
        }
        Some(s) => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][s.feature] <= s.threshold);
            let left = grow(tree, rows, targets, weights, l, depth + 1, params);
            let right = grow(tree, rows, targets, weights, r, depth + 1, params);
            tree.nodes[me] = Node::Split { feature: s.feature, threshold: s.threshold, left, right };
        }
    }
    me
}

fn best_split(rows: &[Row], targets: &[f64], idx: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    let n = idx.len();
    if n < 2 * min_leaf {
        return None;
    }
    let total: f64 = idx.iter().map(|&i| targets[i]).sum();
    let parent = total * total / n as f64;
    let mut best: Option<SplitChoice> = None;
    let mut order = idx.to_vec();
    for feature in 0..N_FEATURES {
        order.sort_by(|&a, &b| rows[a][feature].total_cmp(&rows[b][feature]).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for k in 0..n - 1 {
            left_sum += targets[order[k]];
            let lo = rows[order[k]][feature];
            let hi = rows[order[k + 1]][feature];
            if lo == hi {
                continue;
            }
            let n_left = k + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64 - parent;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(SplitChoice { feature, threshold, gain });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_two_leaf_tree() {
        let t = RegressionTree {
            nodes: vec![
                Node::Split { feature: 1, threshold: 2.0, left: 1, right: 2 },
                Node::Leaf { value: 0.1 },
                Node::Leaf { value: 0.9 },
            ],
        };
        assert!(t.is_well_formed());
        assert_eq!(t.predict(&[0.0, 3.0, 10.0, 0.0]), 0.9);
        assert_eq!(t.predict(&[0.0, 2.0, 10.0, 0.0]), 0.1);
    }

    #[test]
    fn fits_a_step() {
        let rows: Vec<Row> = (0..8).map(|i| [0.0, i as f64, 0.0, 0.0]).collect();
        let targets: Vec<f64> = (0..8).map(|i| if i < 4 { -1.0 } else { 1.0 }).collect();
        let weights = vec![1.0; 8];
        let sample: Vec<usize> = (0..8).collect();
        let t = fit_tree(&rows, &targets, &weights, &sample, TreeParams { max_depth: 3, min_samples_leaf: 2 });
        assert_eq!(t.predict(&[0.0, 1.0, 0.0, 0.0]), -1.0);
        assert_eq!(t.predict(&[0.0, 6.0, 0.0, 0.0]), 1.0);
        assert_eq!(t.leaf_count(), 2);
    }

    #[test]
    fn respects_min_leaf() {
        let rows: Vec<Row> = (0..3).map(|i| [i as f64, 0.0, 0.0, 0.0]).collect();
        let t =
            fit_tree(&rows, &[5.0, 0.0, 0.0], &[1.0; 3], &[0, 1, 2], TreeParams { max_depth: 3, min_samples_leaf: 2 });
        assert_eq!(t.leaf_count(), 1);
    }
}
