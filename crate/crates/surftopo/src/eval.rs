//! Evaluation: Dice overlap, repeated subsampling experiments, Fisher
//! discriminant scores, and hyperparameter selection by cross-validation.
//!
//! The central protocol trains on a random per-class subsample of the
//! training rows (half of the engraved rows, a third of the natural rows by
//! default), evaluates the Dice similarity coefficient of the engraved
//! class on a fixed held-out set, and repeats with fresh draws; the run is
//! summarized by the median and the spread of the per-repetition scores.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::descriptors::mean_and_population_std;
use crate::error::{Error, Result};
use crate::ingest::{LABEL_ENGRAVED, LABEL_NATURAL};
use crate::rusboost::{BoostedEnsemble, FeatureMatrix};

/// Dice similarity coefficient of the engraved class between two label
/// vectors: `2|X n Y| / (|X| + |Y|)` where `X` and `Y` are the predicted
/// and true engraved index sets. Both sets empty counts as perfect overlap.
pub fn dsc(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Stats(format!(
            "label vectors differ in length: {} vs {}",
            predicted.len(),
            truth.len()
        )));
    }
    for &l in predicted.iter().chain(truth) {
        if l != LABEL_ENGRAVED && l != LABEL_NATURAL {
            return Err(Error::Stats(format!("label {l} is neither class")));
        }
    }
    let x = predicted.iter().filter(|&&l| l == LABEL_ENGRAVED).count();
    let y = truth.iter().filter(|&&l| l == LABEL_ENGRAVED).count();
    if x + y == 0 {
        return Ok(1.0);
    }
    let both = predicted
        .iter()
        .zip(truth)
        .filter(|&(&p, &t)| p == LABEL_ENGRAVED && t == LABEL_ENGRAVED)
        .count();
    Ok(2.0 * both as f64 / (x + y) as f64)
}

/// Median of the values (mean of the two middle values for even counts).
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Stats("median of no values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Protocol of a repeated subsampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    /// Number of independent repetitions.
    pub reps: usize,
    /// Fraction of engraved training rows drawn per repetition.
    pub engraved_fraction: f64,
    /// Fraction of natural training rows drawn per repetition.
    pub natural_fraction: f64,
    /// Base seed; repetition `r` trains with seed `seed + r`.
    pub seed: u64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            reps: 10,
            engraved_fraction: 0.5,
            natural_fraction: 0.3,
            seed: 0,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be positive".into()));
        }
        for (name, f) in [
            ("engraved_fraction", self.engraved_fraction),
            ("natural_fraction", self.natural_fraction),
        ] {
            if !(f.is_finite() && f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in (0, 1], got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of a repeated subsampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Per-repetition Dice scores, in repetition order.
    pub dsc_values: Vec<f64>,
    pub median: f64,
    /// Population standard deviation of the per-repetition scores.
    pub std_dev: f64,
}

/// Anything that turns a training matrix and a seed into a model.
pub type FitFn<'a> = dyn Fn(&FeatureMatrix, u64) -> Result<BoostedEnsemble> + Sync + 'a;

/// Run the repeated subsampling protocol: for each repetition draw the
/// per-class fractions from `train` (without replacement, uniformly),
/// fit with `fit(subsample, plan.seed + rep)`, predict `test`, and score
/// the engraved-class Dice coefficient against the test labels.
pub fn run_experiment(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    plan: &ExperimentPlan,
    fit: &FitFn,
) -> Result<RunResult> {
    plan.validate()?;
    if train.feature_names() != test.feature_names() {
        return Err(Error::SchemaMismatch(
            "train and test tables have different features".into(),
        ));
    }
    let engraved: Vec<usize> = class_rows(train, LABEL_ENGRAVED);
    let natural: Vec<usize> = class_rows(train, LABEL_NATURAL);
    if engraved.is_empty() {
        return Err(Error::SingleClass(LABEL_NATURAL));
    }
    if natural.is_empty() {
        return Err(Error::SingleClass(LABEL_ENGRAVED));
    }

    let dsc_values: Vec<f64> = (0..plan.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = plan.seed + rep as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Both classes are drawn from one rng in a fixed order, so a
            // repetition is fully determined by its seed.
            let mut rows = draw_fraction(&engraved, plan.engraved_fraction, &mut rng);
            rows.extend(draw_fraction(&natural, plan.natural_fraction, &mut rng));
            rows.sort_unstable();
            let subsample = train.select_rows(&rows);
            let ensemble = fit(&subsample, seed)?;
            let (_, labels) = ensemble.predict(test)?;
            dsc(&labels, test.labels())
        })
        .collect::<Result<_>>()?;

    let med = median(&dsc_values)?;
    let (_, std_dev) = mean_and_population_std(&dsc_values);
    Ok(RunResult {
        dsc_values,
        median: med,
        std_dev,
    })
}

fn class_rows(data: &FeatureMatrix, label: u8) -> Vec<usize> {
    (0..data.n_rows())
        .filter(|&i| data.labels()[i] == label)
        .collect()
}

/// Uniformly draw `round(fraction * n)` (at least 1) of the rows without
/// replacement, returned in ascending order.
fn draw_fraction(rows: &[usize], fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let amount = ((fraction * rows.len() as f64).round() as usize)
        .max(1)
        .min(rows.len());
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, rows.len(), amount)
        .into_iter()
        .map(|i| rows[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Per-feature Fisher discriminant score between the two classes:
/// `(mu1 - mu2)^2 / (sigma1^2 + sigma2^2)` with population variances.
/// A zero denominator yields 0 for equal means and infinity otherwise.
pub fn fisher_scores(data: &FeatureMatrix) -> Result<Vec<f64>> {
    let ones = class_rows(data, LABEL_ENGRAVED);
    let twos = class_rows(data, LABEL_NATURAL);
    if ones.is_empty() {
        return Err(Error::SingleClass(LABEL_NATURAL));
    }
    if twos.is_empty() {
        return Err(Error::SingleClass(LABEL_ENGRAVED));
    }
    let mut scores = Vec::with_capacity(data.n_features());
    let column =
        |rows: &[usize], f: usize| -> Vec<f64> { rows.iter().map(|&r| data.row(r)[f]).collect() };
    for f in 0..data.n_features() {
        scores.push(fisher_score(&column(&ones, f), &column(&twos, f))?);
    }
    Ok(scores)
}

/// Fisher score of two one-dimensional samples (see [`fisher_scores`]).
pub fn fisher_score(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Stats("fisher score of an empty sample".into()));
    }
    let (mean_a, std_a) = mean_and_population_std(a);
    let (mean_b, std_b) = mean_and_population_std(b);
    let numerator = (mean_a - mean_b).powi(2);
    let denominator = std_a * std_a + std_b * std_b;
    Ok(if denominator > 0.0 {
        numerator / denominator
    } else if numerator > 0.0 {
        f64::INFINITY
    } else {
        0.0
    })
}

/// Mean Dice per hyperparameter combination in a cross-validation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CvCell {
    pub rounds: usize,
    pub max_depth: usize,
    pub fold_dscs: Vec<f64>,
    pub mean_dsc: f64,
}

/// Result of [`select_hyperparameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct CvSelection {
    pub rounds: usize,
    pub max_depth: usize,
    pub mean_dsc: f64,
    /// Every evaluated cell, rounds-major in grid order.
    pub cells: Vec<CvCell>,
}

/// Pick `(rounds, max_depth)` from the grids by stratified k-fold
/// cross-validation, maximizing the mean held-out Dice score. Ties keep
/// the earliest grid entry (fewest rounds, then shallowest trees).
pub fn select_hyperparameters(
    data: &FeatureMatrix,
    base: &crate::rusboost::RusBoostConfig,
    rounds_grid: &[usize],
    depth_grid: &[usize],
    folds: usize,
    seed: u64,
) -> Result<CvSelection> {
    if folds < 2 {
        return Err(Error::InvalidConfig("need at least 2 folds".into()));
    }
    if rounds_grid.is_empty() || depth_grid.is_empty() {
        return Err(Error::InvalidConfig("empty hyperparameter grid".into()));
    }
    let assignments = stratified_folds(data, folds, seed)?;
    let mut cells = Vec::with_capacity(rounds_grid.len() * depth_grid.len());
    for &rounds in rounds_grid {
        for &max_depth in depth_grid {
            let config = crate::rusboost::RusBoostConfig {
                rounds,
                max_depth,
                ..base.clone()
            };
            let fold_dscs: Vec<f64> = (0..folds)
                .into_par_iter()
                .map(|fold| {
                    let train_rows: Vec<usize> = (0..data.n_rows())
                        .filter(|&i| assignments[i] != fold)
                        .collect();
                    let test_rows: Vec<usize> = (0..data.n_rows())
                        .filter(|&i| assignments[i] == fold)
                        .collect();
                    let model = crate::rusboost::train_rusboost(
                        &data.select_rows(&train_rows),
                        &config.clone().with_seed(seed + fold as u64),
                    )?;
                    let test = data.select_rows(&test_rows);
                    let (_, labels) = model.predict(&test)?;
                    dsc(&labels, test.labels())
                })
                .collect::<Result<_>>()?;
            let mean_dsc = fold_dscs.iter().sum::<f64>() / folds as f64;
            cells.push(CvCell {
                rounds,
                max_depth,
                fold_dscs,
                mean_dsc,
            });
        }
    }
    let best = cells
        .iter()
        .max_by(|a, b| {
            a.mean_dsc
                .partial_cmp(&b.mean_dsc)
                .expect("dsc values are finite")
        })
        .expect("grid is nonempty");
    // max_by keeps the *last* maximum; scan for the first instead.
    let best = cells
        .iter()
        .find(|c| c.mean_dsc == best.mean_dsc)
        .expect("a maximum exists");
    Ok(CvSelection {
        rounds: best.rounds,
        max_depth: best.max_depth,
        mean_dsc: best.mean_dsc,
        cells,
    })
}

/// Deal each class's shuffled rows round-robin over `folds` folds, so every
/// fold sees both classes. Requires at least `folds` rows of each class.
fn stratified_folds(data: &FeatureMatrix, folds: usize, seed: u64) -> Result<Vec<usize>> {
    use rand::seq::SliceRandom;
    let mut assignments = vec![0usize; data.n_rows()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for label in [LABEL_ENGRAVED, LABEL_NATURAL] {
        let mut rows = class_rows(data, label);
        if rows.len() < folds {
            return Err(Error::Experiment(format!(
                "class {label} has {} rows, fewer than {folds} folds",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng);
        for (i, row) in rows.into_iter().enumerate() {
            assignments[row] = i % folds;
        }
    }
    Ok(assignments)
}
