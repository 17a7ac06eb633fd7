use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub subsample: f64,
    pub seed: u64,
}

/// Gradient-boosted regression trees under squared loss.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedTrees {
    base: f64,
    learning_rate: f64,
    trees: Vec<RegressionTree>,
}

impl BoostedTrees {
    pub fn fit(x: &Matrix, y: &[f64], params: &TreeParams) -> Self {
        let n = x.rows();
        let base = y.iter().sum::<f64>() / n as f64;
        let order: Vec<Vec<usize>> = (0..x.cols())
            .map(|j| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| x.get(a, j).total_cmp(&x.get(b, j)));
                idx
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut fitted = vec![base; n];
        let mut residual = vec![0.0; n];
        let mut in_sample = vec![true; n];
        let take = ((params.subsample.clamp(0.0, 1.0) * n as f64).round() as usize).clamp(1, n);
        let mut trees = Vec::with_capacity(params.rounds);
        for _ in 0..params.rounds {
            for i in 0..n {
                residual[i] = y[i] - fitted[i];
            }
            if take < n {
                in_sample.iter_mut().for_each(|s| *s = false);
                for i in index::sample(&mut rng, n, take) {
                    in_sample[i] = true;
                }
            }
            let mut builder = Builder { x, residual: &residual, order: &order, params, nodes: Vec::new() };
            let members: Vec<bool> = in_sample.clone();
            builder.grow(members, 0);
            let tree = RegressionTree { nodes: builder.nodes };
            for (i, f) in fitted.iter_mut().enumerate() {
                *f += params.learning_rate * tree.predict_row(x.row(i));
            }
            trees.push(tree);
        }
        BoostedTrees { base, learning_rate: params.learning_rate, trees }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.base + self.learning_rate * self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }
}

struct Builder<'a> {
    x: &'a Matrix,
    residual: &'a [f64],
    order: &'a [Vec<usize>],
    params: &'a TreeParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    /// Appends the subtree for `members` and returns its node index.
    fn grow(&mut self, members: Vec<bool>, depth: usize) -> usize {
        let id = self.nodes.len();
        let (count, sum, sq) = members
            .iter()
            .zip(self.residual)
            .filter(|(m, _)| **m)
            .fold((0usize, 0.0, 0.0), |(c, s, q), (_, r)| (c + 1, s + r, q + r * r));
        let leaf = if count == 0 { 0.0 } else { sum / count as f64 };
        self.nodes.push(Node::Leaf(leaf));
        let impure = count > 0 && sq - sum * sum / count as f64 > 1e-12;
        if !impure || depth >= self.params.max_depth || count < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let Some(best) = self.best_split(&members, count, sum) else {
            return id;
        };
        let mut left = members.clone();
        let mut right = members;
        for i in 0..left.len() {
            if left[i] {
                if self.x.get(i, best.feature) <= best.threshold {
                    right[i] = false;
                } else {
                    left[i] = false;
                }
            }
        }
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split { feature: best.feature, threshold: best.threshold, left: l, right: r };
        id
    }

    fn best_split(&self, members: &[bool], count: usize, sum: f64) -> Option<BestSplit> {
        let min_leaf = self.params.min_leaf.max(1);
        let parent = sum * sum / count as f64;
        let mut best: Option<BestSplit> = None;
        for (feature, order) in self.order.iter().enumerate() {
            let mut n_left = 0usize;
            let mut s_left = 0.0;
            let mut prev: Option<f64> = None;
            for &i in order.iter().filter(|&&i| members[i]) {
                let v = self.x.get(i, feature);
                if let Some(p) = prev {
                    if v > p && n_left >= min_leaf && count - n_left >= min_leaf {
                        let n_right = (count - n_left) as f64;
                        let s_right = sum - s_left;
                        let gain = s_left * s_left / n_left as f64 + s_right * s_right / n_right - parent;
                        if gain > -1e-12 && best.as_ref().is_none_or(|b| gain > b.gain + 1e-12) {
                            best = Some(BestSplit { gain, feature, threshold: p + (v - p) / 2.0 });
                        }
                    }
                }
                n_left += 1;
                s_left += self.residual[i];
                prev = Some(v);
            }
        }
        best
    }
}
