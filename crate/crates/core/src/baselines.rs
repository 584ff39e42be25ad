//! Supervised comparison models: logistic regression and a CART-style
//! decision tree.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, FRAUD};
use crate::error::{check_dim, Error, Result};
use crate::matrix::{dot, Matrix};
use crate::neural::sigmoid;
use crate::rng::{seeded, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn zeros(n_features: usize) -> Self {
        LogisticModel {
            weights: vec![0.0; n_features],
            bias: 0.0,
        }
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// `None` is full-batch descent.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: None,
            seed: 0,
        }
    }
}

/// Mean binary cross-entropy.
pub fn log_loss(model: &LogisticModel, d: &Dataset) -> Result<f64> {
    check_dim(model.weights.len(), d.n_features())?;
    if d.is_empty() {
        return Err(Error::Empty("log-loss data"));
    }
    let eps = 1e-15;
    let total: f64 = d
        .features
        .iter_rows()
        .zip(&d.labels)
        .map(|(x, &y)| {
            let p = model.probability(x).clamp(eps, 1.0 - eps);
            if y == FRAUD {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / d.len() as f64)
}

/// Gradient descent on log-loss from a zero model. Returns the model and the
/// log-loss after each epoch.
pub fn train_logistic_with_history(
    d: &Dataset,
    cfg: &LogisticConfig,
) -> Result<(LogisticModel, Vec<f64>)> {
    if d.is_empty() {
        return Err(Error::Empty("logistic training data"));
    }
    if !(cfg.learning_rate >= 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "learning_rate {} must be finite and non-negative",
            cfg.learning_rate
        )));
    }
    let n = d.len();
    let batch = cfg.batch_size.unwrap_or(n).max(1);
    let mut model = LogisticModel::zeros(d.n_features());
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeded(cfg.seed, stream::SHUFFLE);
    let mut grad_w = vec![0.0; d.n_features()];
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        if cfg.batch_size.is_some() {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            grad_w.fill(0.0);
            let mut grad_b = 0.0;
            for &i in chunk {
                let x = d.features.row(i);
                let err = model.probability(x) - f64::from(d.labels[i]);
                for (g, xi) in grad_w.iter_mut().zip(x) {
                    *g += err * xi;
                }
                grad_b += err;
            }
            let step = cfg.learning_rate / chunk.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(&grad_w) {
                *w -= step * g;
            }
            model.bias -= step * grad_b;
        }
        history.push(log_loss(&model, d)?);
    }
    Ok((model, history))
}

pub fn train_logistic(d: &Dataset, cfg: &LogisticConfig) -> Result<LogisticModel> {
    train_logistic_with_history(d, cfg).map(|(m, _)| m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Gini,
    Entropy,
}

impl Criterion {
    /// Impurity of a node with `pos` positives out of `n`; entropy in bits.
    pub fn impurity(self, pos: usize, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let p = pos as f64 / n as f64;
        let q = 1.0 - p;
        match self {
            Criterion::Gini => 1.0 - p * p - q * q,
            Criterion::Entropy => {
                let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
                h(p) + h(q)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        /// `[P(legit), P(fraud)]` among training rows in the leaf.
        proba: [f64; 2],
        samples: usize,
        impurity: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        samples: usize,
        impurity: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Fraud probability of the leaf `x` lands in; `x[feature] <= threshold` goes left.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { proba, .. } => return proba[1],
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn impurity(&self) -> f64 {
        match self {
            TreeNode::Leaf { impurity, .. } | TreeNode::Split { impurity, .. } => *impurity,
        }
    }

    pub fn samples(&self) -> usize {
        match self {
            TreeNode::Leaf { samples, .. } | TreeNode::Split { samples, .. } => *samples,
        }
    }

    /// Largest feature index referenced by any split.
    fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split {
                feature,
                left,
                right,
                ..
            } => [Some(*feature), left.max_feature(), right.max_feature()]
                .into_iter()
                .flatten()
                .max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub criterion: Criterion,
    /// `usize::MAX` for unbounded.
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            criterion: Criterion::Gini,
            max_depth: 10,
            min_leaf: 1,
        }
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    cfg: TreeConfig,
}

impl TreeBuilder<'_> {
    fn positives(&self, idx: &[usize]) -> usize {
        idx.iter().filter(|&&i| self.y[i] == FRAUD).count()
    }

    fn leaf(&self, idx: &[usize]) -> TreeNode {
        let pos = self.positives(idx);
        let p = pos as f64 / idx.len() as f64;
        TreeNode::Leaf {
            proba: [1.0 - p, p],
            samples: idx.len(),
            impurity: self.cfg.criterion.impurity(pos, idx.len()),
        }
    }

    /// Lowest weighted child impurity; ties keep the lower feature, then the
    /// lower threshold.
    fn best_split(&self, idx: &[usize]) -> Option<SplitChoice> {
        let n = idx.len();
        let total_pos = self.positives(idx);
        let mut best: Option<SplitChoice> = None;
        let mut sorted = idx.to_vec();
        for f in 0..self.x.cols() {
            sorted.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)));
            let mut left_pos = 0;
            for k in 1..n {
                if self.y[sorted[k - 1]] == FRAUD {
                    left_pos += 1;
                }
                let lo = self.x.get(sorted[k - 1], f);
                let hi = self.x.get(sorted[k], f);
                if lo == hi || k < self.cfg.min_leaf || n - k < self.cfg.min_leaf {
                    continue;
                }
                let c = self.cfg.criterion;
                let score = (k as f64 * c.impurity(left_pos, k)
                    + (n - k) as f64 * c.impurity(total_pos - left_pos, n - k))
                    / n as f64;
                if best.as_ref().is_none_or(|b| score < b.score - 1e-12) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if !(threshold < hi) {
                        threshold = lo;
                    }
                    best = Some(SplitChoice {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }

    fn grow(&self, idx: &[usize], depth: usize) -> TreeNode {
        let pos = self.positives(idx);
        let impurity = self.cfg.criterion.impurity(pos, idx.len());
        if impurity == 0.0 || depth >= self.cfg.max_depth || idx.len() < 2 * self.cfg.min_leaf {
            return self.leaf(idx);
        }
        let Some(split) = self.best_split(idx) else {
            return self.leaf(idx);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.get(i, split.feature) <= split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            samples: idx.len(),
            impurity,
            left: Box::new(self.grow(&left, depth + 1)),
            right: Box::new(self.grow(&right, depth + 1)),
        }
    }
}

/// Greedy top-down tree. Candidate thresholds are midpoints between
/// consecutive distinct values; growth stops at `max_depth`, at a pure node,
/// or when no split leaves `min_leaf` rows on both sides.
pub fn train_tree(d: &Dataset, cfg: &TreeConfig) -> Result<TreeNode> {
    if d.is_empty() {
        return Err(Error::Empty("tree training data"));
    }
    if cfg.max_depth == 0 || cfg.min_leaf == 0 {
        return Err(Error::InvalidParam(format!(
            "max_depth ({}) and min_leaf ({}) must be positive",
            cfg.max_depth, cfg.min_leaf
        )));
    }
    let builder = TreeBuilder {
        x: &d.features,
        y: &d.labels,
        cfg: *cfg,
    };
    let idx: Vec<usize> = (0..d.len()).collect();
    Ok(builder.grow(&idx, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Baseline {
    Logistic(LogisticModel),
    Tree(TreeNode),
}

/// Fraud probabilities and `probability > 0.5` predictions.
pub fn predict_baseline(model: &Baseline, rows: &Matrix) -> Result<(Vec<f64>, Vec<u8>)> {
    let scores: Vec<f64> = match model {
        Baseline::Logistic(m) => {
            if rows.rows() > 0 {
                check_dim(m.weights.len(), rows.cols())?;
            }
            rows.iter_rows().map(|x| m.probability(x)).collect()
        }
        Baseline::Tree(t) => {
            if let Some(f) = t.max_feature() {
                if rows.rows() > 0 && rows.cols() <= f {
                    return Err(Error::Dimension {
                        expected: f + 1,
                        got: rows.cols(),
                    });
                }
            }
            rows.iter_rows().map(|x| t.predict_proba(x)).collect()
        }
    };
    let preds = scores.iter().map(|&s| u8::from(s > 0.5)).collect();
    Ok((scores, preds))
}
