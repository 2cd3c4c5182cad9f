//! Boosted decision trees with random undersampling (RUSBoost).
//!
//! Binary classification of labelled feature rows (class 1 = engraved,
//! class 2 = natural). Each boosting round draws a balanced training sample:
//! every minority-class row is kept and the majority class is undersampled
//! without replacement, proportionally to the current boosting weights. A
//! depth-limited CART tree with weighted Gini splits is fitted on the
//! sample, its error is measured on the *full* weighted set, and the usual
//! AdaBoost update follows. Setting `undersample_ratio` to `None` disables
//! the sampling step entirely, which turns the procedure into plain
//! AdaBoost — useful as a baseline with otherwise identical machinery.
//!
//! Feature importances are impurity based: each split contributes its Gini
//! decrease weighted by the node's share of the round's training weight,
//! summed over trees with their boosting coefficients, normalized to one.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{LABEL_ENGRAVED, LABEL_NATURAL};

/// Labelled dense feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl FeatureMatrix {
    /// Build a matrix from row-major values and class labels (1 or 2).
    pub fn new(feature_names: Vec<String>, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::InvalidConfig("no features".into()));
        }
        if labels.is_empty() {
            return Err(Error::InvalidConfig("no rows".into()));
        }
        if values.len() != feature_names.len() * labels.len() {
            return Err(Error::ShapeMismatch {
                expected_height: labels.len(),
                expected_width: feature_names.len(),
                got_height: values.len() / feature_names.len().max(1),
                got_width: feature_names.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "feature value at row {}, column {}",
                i / feature_names.len(),
                i % feature_names.len()
            )));
        }
        if let Some(i) = labels
            .iter()
            .position(|&l| l != LABEL_ENGRAVED && l != LABEL_NATURAL)
        {
            return Err(Error::InvalidConfig(format!(
                "label {} at row {i}; expected {LABEL_ENGRAVED} or {LABEL_NATURAL}",
                labels[i]
            )));
        }
        Ok(FeatureMatrix {
            feature_names,
            values,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let f = self.n_features();
        &self.values[i * f..(i + 1) * f]
    }

    fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features() + feature]
    }

    /// New matrix with the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let f = self.n_features();
        let mut values = Vec::with_capacity(rows.len() * f);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            values.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            values,
            labels,
        }
    }
}

/// One tree node; serialized as the array
/// `[feature, threshold, left, right, prob]` with `feature = -1` marking a
/// leaf (then `prob` is the weighted class-1 probability).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "(i32, f64, i32, i32, f64)", from = "(i32, f64, i32, i32, f64)")]
pub struct TreeNode {
    pub feature: i32,
    pub threshold: f64,
    pub left: i32,
    pub right: i32,
    pub prob: f64,
}

impl From<TreeNode> for (i32, f64, i32, i32, f64) {
    fn from(n: TreeNode) -> Self {
        (n.feature, n.threshold, n.left, n.right, n.prob)
    }
}

impl From<(i32, f64, i32, i32, f64)> for TreeNode {
    fn from(t: (i32, f64, i32, i32, f64)) -> Self {
        TreeNode {
            feature: t.0,
            threshold: t.1,
            left: t.2,
            right: t.3,
            prob: t.4,
        }
    }
}

fn leaf(prob: f64) -> TreeNode {
    TreeNode {
        feature: -1,
        threshold: 0.0,
        left: -1,
        right: -1,
        prob,
    }
}

/// A CART tree stored as an arena with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    /// Weighted class-1 probability at the leaf this row falls into.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            let node = &self.nodes[at];
            if node.feature < 0 {
                return node.prob;
            }
            at = if row[node.feature as usize] <= node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

    /// Number of split (non-leaf) nodes.
    pub fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.feature >= 0).count()
    }
}

/// Training options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RusBoostConfig {
    /// Number of boosting rounds.
    pub rounds: usize,
    /// Maximum tree depth (1 = stumps).
    pub max_depth: usize,
    /// Majority-to-minority size ratio of each round's sample; `None`
    /// disables undersampling (plain AdaBoost).
    pub undersample_ratio: Option<f64>,
    /// Seed of the per-round sampling.
    pub seed: u64,
    /// Redraws allowed per round when the fitted tree has error >= 1/2.
    pub max_redraws: usize,
}

impl Default for RusBoostConfig {
    fn default() -> Self {
        RusBoostConfig {
            rounds: 50,
            max_depth: 3,
            undersample_ratio: Some(1.0),
            seed: 0,
            max_redraws: 10,
        }
    }
}

impl RusBoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.rounds > 10_000 {
            return Err(Error::InvalidConfig(format!(
                "rounds must lie in 1..=10000, got {}",
                self.rounds
            )));
        }
        if self.max_depth == 0 || self.max_depth > 16 {
            return Err(Error::InvalidConfig(format!(
                "max_depth must lie in 1..=16, got {}",
                self.max_depth
            )));
        }
        if let Some(r) = self.undersample_ratio {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "undersample_ratio must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Error floor substituted for a zero round error when computing the
/// boosting coefficient; caps alpha near 6.9.
const EPS_FLOOR: f64 = 1e-6;

/// A trained boosted ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub feature_names: Vec<String>,
    pub trees: Vec<DecisionTree>,
    pub alphas: Vec<f64>,
    /// Normalized impurity-based feature importances (sum 1, or all zero
    /// for a degenerate ensemble).
    pub feature_importance: Vec<f64>,
    pub config: RusBoostConfig,
    /// Training prevalence of class 1, used as the score when no tree
    /// survived training.
    pub prior: f64,
    /// True when every round was discarded and the ensemble predicts the
    /// prior.
    pub degenerate: bool,
}

/// Per-round training diagnostics.
#[derive(Debug, Clone)]
pub struct RoundTrace {
    /// Rows (into the training matrix) of the fitted sample.
    pub sampled_rows: Vec<usize>,
    /// Weighted error on the full training set.
    pub epsilon: f64,
    pub alpha: f64,
    /// Extra draws taken because the error was >= 1/2.
    pub redraws: usize,
    /// True when the round was abandoned (no tree added).
    pub discarded: bool,
    /// Boosting weights after the round's update.
    pub weights_after: Vec<f64>,
}

/// Train a RUSBoost ensemble (see module docs).
pub fn train_rusboost(data: &FeatureMatrix, config: &RusBoostConfig) -> Result<BoostedEnsemble> {
    train_rusboost_traced(data, config).map(|(ensemble, _)| ensemble)
}

/// As [`train_rusboost`], additionally returning per-round diagnostics.
pub fn train_rusboost_traced(
    data: &FeatureMatrix,
    config: &RusBoostConfig,
) -> Result<(BoostedEnsemble, Vec<RoundTrace>)> {
    config.validate()?;
    let n = data.n_rows();
    let n_features = data.n_features();
    let count1 = data
        .labels()
        .iter()
        .filter(|&&l| l == LABEL_ENGRAVED)
        .count();
    let count2 = n - count1;
    if count1 == 0 {
        return Err(Error::SingleClass(LABEL_NATURAL));
    }
    if count2 == 0 {
        return Err(Error::SingleClass(LABEL_ENGRAVED));
    }
    // Class 1 is the minority on ties, matching its role in the data.
    let minority_label = if count1 <= count2 {
        LABEL_ENGRAVED
    } else {
        LABEL_NATURAL
    };
    let minority_rows: Vec<usize> = (0..n)
        .filter(|&i| data.labels()[i] == minority_label)
        .collect();
    let majority_rows: Vec<usize> = (0..n)
        .filter(|&i| data.labels()[i] != minority_label)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights = vec![1.0 / n as f64; n];
    let mut trees = Vec::new();
    let mut alphas = Vec::new();
    let mut importance = vec![0.0f64; n_features];
    let mut traces = Vec::new();

    for _round in 0..config.rounds {
        let mut redraws = 0usize;
        let (tree, tree_importance, votes, epsilon, sampled) = loop {
            let sampled: Vec<usize> = match config.undersample_ratio {
                None => (0..n).collect(),
                Some(ratio) => {
                    let want = ((ratio * minority_rows.len() as f64).round() as usize).max(1);
                    let take = want.min(majority_rows.len());
                    let mut rows = minority_rows.clone();
                    rows.extend(weighted_sample_without_replacement(
                        &majority_rows,
                        &weights,
                        take,
                        &mut rng,
                    ));
                    rows.sort_unstable();
                    rows
                }
            };
            let rows: Vec<u32> = sampled.iter().map(|&r| r as u32).collect();
            let (tree, tree_importance) =
                fit_weighted_tree(data, &rows, &weights, config.max_depth);
            // Error on the full weighted set, not just the sample.
            let votes: Vec<bool> = (0..n)
                .map(|i| tree.predict_row(data.row(i)) >= 0.5)
                .collect();
            let epsilon: f64 = (0..n)
                .filter(|&i| votes[i] != (data.labels()[i] == LABEL_ENGRAVED))
                .map(|i| weights[i])
                .sum();
            if epsilon < 0.5 || redraws >= config.max_redraws || config.undersample_ratio.is_none()
            {
                break (tree, tree_importance, votes, epsilon, sampled);
            }
            redraws += 1;
        };

        if epsilon >= 0.5 {
            traces.push(RoundTrace {
                sampled_rows: sampled,
                epsilon,
                alpha: 0.0,
                redraws,
                discarded: true,
                weights_after: weights.clone(),
            });
            continue;
        }

        let eps_eff = epsilon.max(EPS_FLOOR);
        let alpha = 0.5 * ((1.0 - eps_eff) / eps_eff).ln();
        for (f, imp) in tree_importance.iter().enumerate() {
            importance[f] += alpha * imp;
        }
        for i in 0..n {
            let correct = votes[i] == (data.labels()[i] == LABEL_ENGRAVED);
            weights[i] *= if correct { (-alpha).exp() } else { alpha.exp() };
        }
        let z: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= z);

        trees.push(tree);
        alphas.push(alpha);
        traces.push(RoundTrace {
            sampled_rows: sampled,
            epsilon,
            alpha,
            redraws,
            discarded: false,
            weights_after: weights.clone(),
        });
        if epsilon == 0.0 {
            // A perfect classifier; further rounds cannot improve it.
            break;
        }
    }

    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        importance.iter_mut().for_each(|v| *v /= total);
    }
    let ensemble = BoostedEnsemble {
        feature_names: data.feature_names().to_vec(),
        degenerate: trees.is_empty(),
        trees,
        alphas,
        feature_importance: importance,
        config: config.clone(),
        prior: count1 as f64 / n as f64,
    };
    Ok((ensemble, traces))
}

/// Draw `take` distinct items from `pool` with probability proportional to
/// `weights[item]`, by exponential sort keys (`ln(u) / w`, taking the
/// largest). Zero-weight items lose to any positive-weight item and tie
/// among themselves by index.
fn weighted_sample_without_replacement(
    pool: &[usize],
    weights: &[f64],
    take: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = pool
        .iter()
        .map(|&idx| {
            let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
            let w = weights[idx];
            let key = if w > 0.0 {
                u.ln() / w
            } else {
                f64::NEG_INFINITY
            };
            (key, idx)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.truncate(take);
    keyed.into_iter().map(|(_, idx)| idx).collect()
}

fn gini(w1: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p1 = w1 / total;
    let p2 = 1.0 - p1;
    1.0 - p1 * p1 - p2 * p2
}

/// Fit a depth-limited CART tree on `rows` with per-row global `weights`.
///
/// Returns the tree and the per-feature sum of weighted Gini decreases.
/// Ties in gain resolve to the lowest feature index, then the lowest
/// threshold, so fitting is deterministic.
pub(crate) fn fit_weighted_tree(
    data: &FeatureMatrix,
    rows: &[u32],
    weights: &[f64],
    max_depth: usize,
) -> (DecisionTree, Vec<f64>) {
    let n_features = data.n_features();
    // Rows sorted per feature once; children inherit filtered (still
    // sorted) copies.
    let mut lists: Vec<Vec<u32>> = Vec::with_capacity(n_features);
    for f in 0..n_features {
        let mut l = rows.to_vec();
        l.sort_unstable_by(|&a, &b| {
            data.value(a as usize, f)
                .total_cmp(&data.value(b as usize, f))
                .then(a.cmp(&b))
        });
        lists.push(l);
    }
    let root_weight: f64 = rows.iter().map(|&r| weights[r as usize]).sum();
    let mut builder = TreeBuilder {
        data,
        weights,
        max_depth,
        root_weight,
        nodes: Vec::new(),
        importance: vec![0.0; n_features],
    };
    builder.build(lists, 0);
    (
        DecisionTree {
            nodes: builder.nodes,
        },
        builder.importance,
    )
}

struct TreeBuilder<'a> {
    data: &'a FeatureMatrix,
    weights: &'a [f64],
    max_depth: usize,
    root_weight: f64,
    nodes: Vec<TreeNode>,
    importance: Vec<f64>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, lists: Vec<Vec<u32>>, depth: usize) -> i32 {
        let id = self.nodes.len() as i32;
        let rows = &lists[0];
        let total: f64 = rows.iter().map(|&r| self.weights[r as usize]).sum();
        let w1: f64 = rows
            .iter()
            .filter(|&&r| self.data.labels()[r as usize] == LABEL_ENGRAVED)
            .map(|&r| self.weights[r as usize])
            .sum();
        let prob = if total > 0.0 {
            w1 / total
        } else {
            // All-zero weights: fall back to the unweighted fraction.
            let c1 = rows
                .iter()
                .filter(|&&r| self.data.labels()[r as usize] == LABEL_ENGRAVED)
                .count();
            c1 as f64 / rows.len().max(1) as f64
        };
        self.nodes.push(leaf(prob));

        if depth >= self.max_depth || rows.len() < 2 || total <= 0.0 || w1 <= 0.0 || w1 >= total {
            return id;
        }
        let Some((gain, feature, threshold)) = self.best_split(&lists, w1, total) else {
            return id;
        };

        self.importance[feature] += (total / self.root_weight) * gain;
        let n_features = lists.len();
        let mut left_lists = Vec::with_capacity(n_features);
        let mut right_lists = Vec::with_capacity(n_features);
        for list in &lists {
            let (l, r): (Vec<u32>, Vec<u32>) = list
                .iter()
                .partition(|&&row| self.data.value(row as usize, feature) <= threshold);
            left_lists.push(l);
            right_lists.push(r);
        }
        drop(lists);
        let left = self.build(left_lists, depth + 1);
        let right = self.build(right_lists, depth + 1);
        self.nodes[id as usize] = TreeNode {
            feature: feature as i32,
            threshold,
            left,
            right,
            prob,
        };
        id
    }

    /// Best `(gain, feature, threshold)` over all features and candidate
    /// cuts between adjacent distinct values.
    fn best_split(&self, lists: &[Vec<u32>], w1: f64, total: f64) -> Option<(f64, usize, f64)> {
        let parent = gini(w1, total);
        let mut best: Option<(f64, usize, f64)> = None;
        for (feature, list) in lists.iter().enumerate() {
            let mut wl = 0.0f64;
            let mut w1l = 0.0f64;
            for i in 0..list.len() - 1 {
                let r = list[i] as usize;
                wl += self.weights[r];
                if self.data.labels()[r] == LABEL_ENGRAVED {
                    w1l += self.weights[r];
                }
                let v = self.data.value(r, feature);
                let v_next = self.data.value(list[i + 1] as usize, feature);
                if v_next <= v {
                    continue;
                }
                let wr = total - wl;
                let w1r = w1 - w1l;
                let children = (wl * gini(w1l, wl) + wr * gini(w1r, wr)) / total;
                // Impure nodes always split at the best candidate, even at
                // zero gain (depth is the budget); this lets a deeper tree
                // resolve interactions that no single cut improves.
                let gain = (parent - children).max(0.0);
                let mut threshold = v + (v_next - v) / 2.0;
                if threshold >= v_next {
                    // Adjacent floats can round the midpoint up; fall back
                    // to the left value (the split predicate is `<=`).
                    threshold = v;
                }
                let better = match best {
                    None => true,
                    Some((bg, _, _)) => gain > bg,
                };
                if better {
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best
    }
}

impl BoostedEnsemble {
    /// Normalized scores in `[0, 1]` and hard labels (score >= 1/2 means
    /// class 1) for every row. The feature schema must match training.
    pub fn predict(&self, data: &FeatureMatrix) -> Result<(Vec<f64>, Vec<u8>)> {
        if data.feature_names() != &self.feature_names[..] {
            return Err(Error::SchemaMismatch(format!(
                "model was trained on {} features, data has {}",
                self.feature_names.len(),
                data.n_features()
            )));
        }
        let n = data.n_rows();
        let mut scores = Vec::with_capacity(n);
        if self.degenerate {
            scores.resize(n, self.prior);
        } else {
            let alpha_total: f64 = self.alphas.iter().sum();
            for i in 0..n {
                let row = data.row(i);
                let mut raw = 0.0;
                for (tree, &alpha) in self.trees.iter().zip(&self.alphas) {
                    raw += alpha
                        * if tree.predict_row(row) >= 0.5 {
                            1.0
                        } else {
                            -1.0
                        };
                }
                scores.push((0.5 + raw / (2.0 * alpha_total)).clamp(0.0, 1.0));
            }
        }
        let labels = scores
            .iter()
            .map(|&s| {
                if s >= 0.5 {
                    LABEL_ENGRAVED
                } else {
                    LABEL_NATURAL
                }
            })
            .collect();
        Ok((scores, labels))
    }

    /// Normalized impurity importances; errors for an ensemble with no
    /// trees (nothing was learned).
    pub fn gini_importance(&self) -> Result<&[f64]> {
        if self.trees.is_empty() {
            return Err(Error::EmptyEnsemble(
                "importances are undefined without trees".into(),
            ));
        }
        Ok(&self.feature_importance)
    }

    /// Serialize to pretty JSON (schema `rusboost-model/1`).
    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            model: self.clone(),
        };
        let text = serde_json::to_string_pretty(&file).expect("model serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Load and validate a model written by [`BoostedEnsemble::save_json`].
    pub fn load_json(path: &Path) -> Result<BoostedEnsemble> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let bad = |reason: String| Error::ModelFormat {
            path: path.to_path_buf(),
            reason,
        };
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(bad(format!(
                "format {:?}, expected {MODEL_FORMAT:?}",
                file.format
            )));
        }
        let m = file.model;
        let f = m.feature_names.len();
        if m.alphas.len() != m.trees.len() {
            return Err(bad("alphas and trees disagree in length".into()));
        }
        if m.feature_importance.len() != f {
            return Err(bad("importance length differs from feature count".into()));
        }
        for (t, tree) in m.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return Err(bad(format!("tree {t} has no nodes")));
            }
            for node in &tree.nodes {
                if node.feature >= 0 {
                    let n = tree.nodes.len() as i32;
                    if node.feature as usize >= f
                        || node.left < 0
                        || node.left >= n
                        || node.right < 0
                        || node.right >= n
                    {
                        return Err(bad(format!("tree {t} has out-of-range indices")));
                    }
                    if !node.threshold.is_finite() {
                        return Err(bad(format!("tree {t} has a non-finite threshold")));
                    }
                }
            }
        }
        m.config.validate()?;
        Ok(m)
    }
}

const MODEL_FORMAT: &str = "rusboost-model/1";

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    #[serde(flatten)]
    model: BoostedEnsemble,
}
