//! K-fold cross-validation, exhaustive grid search per user, and test-set
//! evaluation summaries.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{fit_scaler, Scaler};
use crate::error::{Error, Result};
use crate::learn::mlp::{train_mlp, MlpConfig, MlpModel};
use crate::learn::svm::{predict_ovo, train_svm_ovo, SvmOvO, SvmTrainConfig};
use crate::scalar::Scalar;

/// A classifier family plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelConfig<T> {
    Svm(SvmTrainConfig<T>),
    Mlp(MlpConfig<T>),
}

/// A trained per-user classifier of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainedModel<T> {
    Svm(SvmOvO<T>),
    Mlp(MlpModel<T>),
}

impl<T: Scalar> TrainedModel<T> {
    pub fn predict(&self, x: &[T]) -> u32 {
        match self {
            TrainedModel::Svm(m) => predict_ovo(m, x),
            TrainedModel::Mlp(m) => m.predict(x),
        }
    }
}

/// Train one classifier on already-scaled rows.
pub fn fit_model<T: Scalar>(
    x: &[Vec<T>],
    labels: &[u32],
    config: &ModelConfig<T>,
) -> Result<TrainedModel<T>> {
    match config {
        ModelConfig::Svm(c) => Ok(TrainedModel::Svm(train_svm_ovo(x, labels, c)?)),
        ModelConfig::Mlp(c) => Ok(TrainedModel::Mlp(train_mlp(x, labels, c)?)),
    }
}

fn accuracy<T: Scalar>(model: &TrainedModel<T>, x: &[Vec<T>], labels: &[u32]) -> f64 {
    let correct = x
        .iter()
        .zip(labels)
        .filter(|(row, &label)| model.predict(row) == label)
        .count();
    correct as f64 / x.len().max(1) as f64
}

/// Share of the most frequent class; the floor any useful classifier must
/// beat.
pub fn majority_class_share(labels: &[u32]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let mut counts = std::collections::BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    *counts.values().max().unwrap() as f64 / labels.len() as f64
}

/// Cross-validation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub k: usize,
}

/// Seeded k-fold cross-validation. The scaler is re-fit inside each fold on
/// that fold's training part only.
pub fn kfold_cv<T: Scalar>(
    x: &[Vec<T>],
    labels: &[u32],
    k: usize,
    config: &ModelConfig<T>,
    seed: u64,
) -> Result<CvReport> {
    if k < 2 {
        return Err(Error::config("cross-validation needs k >= 2"));
    }
    if x.len() < k {
        return Err(Error::TrainingData(format!(
            "{} rows cannot fill {k} folds",
            x.len()
        )));
    }
    if x.len() != labels.len() {
        return Err(Error::dimension("rows and labels disagree"));
    }

    let mut indices: Vec<usize> = (0..x.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    // near-equal folds: the first n % k folds get one extra row
    let base = x.len() / k;
    let extra = x.len() % k;
    let mut folds: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut cursor = 0usize;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(indices[cursor..cursor + len].to_vec());
        cursor += len;
    }

    let mut fold_accuracies = Vec::with_capacity(k);
    for f in 0..k {
        let mut train_x = Vec::new();
        let mut train_y = Vec::new();
        for (g, fold) in folds.iter().enumerate() {
            if g != f {
                for &i in fold {
                    train_x.push(x[i].clone());
                    train_y.push(labels[i]);
                }
            }
        }
        let scaler = fit_scaler(&train_x)?;
        let train_scaled = scaler.transform(&train_x);
        let model = fit_model(&train_scaled, &train_y, config)?;
        let eval_x: Vec<Vec<T>> = folds[f].iter().map(|&i| scaler.transform_row(&x[i])).collect();
        let eval_y: Vec<u32> = folds[f].iter().map(|&i| labels[i]).collect();
        fold_accuracies.push(accuracy(&model, &eval_x, &eval_y));
    }
    let mean = fold_accuracies.iter().sum::<f64>() / k as f64;
    Ok(CvReport {
        fold_accuracies,
        mean,
        k,
    })
}

/// Grid-search outcome for one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserModelReport {
    pub user: usize,
    /// Winning cell (index into the grid, ties to the earlier cell).
    pub config_index: usize,
    pub cv_mean: f64,
    pub test_accuracy: f64,
}

/// Per-user winners plus the models retrained on the full training set.
#[derive(Debug, Clone)]
pub struct GridSearchResult<T> {
    pub reports: Vec<UserModelReport>,
    pub models: Vec<TrainedModel<T>>,
    /// Scaler fitted on the full training set (what the models expect).
    pub scaler: Scaler<T>,
}

/// For every user: pick the grid cell with the best k-fold mean accuracy,
/// retrain it on the whole training set and score it on the held-out test
/// set.
pub fn grid_search<T: Scalar>(
    train_x: &[Vec<T>],
    train_labels: &[Vec<u32>],
    test_x: &[Vec<T>],
    test_labels: &[Vec<u32>],
    grid: &[ModelConfig<T>],
    k: usize,
    seed: u64,
) -> Result<GridSearchResult<T>> {
    if grid.is_empty() {
        return Err(Error::config("grid search needs at least one cell"));
    }
    let users = train_labels.len();
    if users == 0 || test_labels.len() != users {
        return Err(Error::dimension(
            "train and test label tables must cover the same users",
        ));
    }

    let scaler = fit_scaler(train_x)?;
    let train_scaled = scaler.transform(train_x);
    let test_scaled = scaler.transform(test_x);

    let outcomes: Result<Vec<(UserModelReport, TrainedModel<T>)>> = (0..users)
        .into_par_iter()
        .map(|user| {
            let mut best: Option<(usize, f64)> = None;
            for (idx, config) in grid.iter().enumerate() {
                let report = kfold_cv(train_x, &train_labels[user], k, config, seed)?;
                let better = match best {
                    Some((_, mean)) => report.mean > mean,
                    None => true,
                };
                if better {
                    best = Some((idx, report.mean));
                }
            }
            let (config_index, cv_mean) = best.expect("non-empty grid");
            let model = fit_model(&train_scaled, &train_labels[user], &grid[config_index])?;
            let test_accuracy = accuracy(&model, &test_scaled, &test_labels[user]);
            Ok((
                UserModelReport {
                    user,
                    config_index,
                    cv_mean,
                    test_accuracy,
                },
                model,
            ))
        })
        .collect();

    let (reports, models) = outcomes?.into_iter().unzip();
    Ok(GridSearchResult {
        reports,
        models,
        scaler,
    })
}

/// Accuracy summary across per-user models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub per_user: Vec<f64>,
    pub min: f64,
    pub mean: f64,
}

/// Score per-user models on already-scaled test rows.
pub fn evaluate_models<T: Scalar>(
    models: &[TrainedModel<T>],
    test_x: &[Vec<T>],
    test_labels: &[Vec<u32>],
) -> Result<EvalSummary> {
    if models.len() != test_labels.len() {
        return Err(Error::dimension(
            "one label column per model is required",
        ));
    }
    if test_x.is_empty() {
        return Err(Error::TrainingData("empty test set".into()));
    }
    let per_user: Vec<f64> = models
        .iter()
        .zip(test_labels)
        .map(|(model, labels)| accuracy(model, test_x, labels))
        .collect();
    let min = per_user.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = per_user.iter().sum::<f64>() / per_user.len() as f64;
    Ok(EvalSummary {
        per_user,
        min,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::kernel::KernelSpec;

    /// Rows whose label equals a feature-derived oracle.
    fn oracle_rows(n: usize) -> (Vec<Vec<f64>>, Vec<u32>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let v = (i % 2) as f64;
            let noise = (i % 7) as f64 * 0.01;
            x.push(vec![v * 4.0 + noise, 1.0 - v + noise]);
            y.push(v as u32);
        }
        (x, y)
    }

    fn linear_svm() -> ModelConfig<f64> {
        ModelConfig::Svm(SvmTrainConfig::new(10.0, KernelSpec::linear()))
    }

    #[test]
    fn folds_partition_and_size_correctly() {
        let (x, y) = oracle_rows(100);
        let report = kfold_cv(&x, &y, 5, &linear_svm(), 3).unwrap();
        assert_eq!(report.k, 5);
        assert_eq!(report.fold_accuracies.len(), 5);
        // a feature-derived label is learned perfectly
        assert_eq!(report.mean, 1.0);
    }

    #[test]
    fn cv_rejects_undersized_input() {
        let (x, y) = oracle_rows(3);
        assert!(kfold_cv(&x, &y, 5, &linear_svm(), 1).is_err());
        assert!(kfold_cv(&x, &y, 1, &linear_svm(), 1).is_err());
    }

    #[test]
    fn cv_is_deterministic() {
        let (x, y) = oracle_rows(40);
        let a = kfold_cv(&x, &y, 4, &linear_svm(), 9).unwrap();
        let b = kfold_cv(&x, &y, 4, &linear_svm(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_grid_returns_its_only_cell() {
        let (x, y) = oracle_rows(40);
        let labels = vec![y.clone(), y];
        let result = grid_search(&x, &labels, &x, &labels, &[linear_svm()], 4, 1).unwrap();
        assert_eq!(result.reports.len(), 2);
        for report in &result.reports {
            assert_eq!(report.config_index, 0);
        }
    }

    #[test]
    fn dominated_cells_never_win() {
        let (x, y) = oracle_rows(60);
        let labels = vec![y];
        let good = linear_svm();
        // sigmoid with big gamma on this data is strictly worse
        let bad = ModelConfig::Svm(SvmTrainConfig::new(
            0.001,
            KernelSpec::sigmoid(50.0, -3.0),
        ));
        let slim = grid_search(&x, &labels, &x, &labels, &[good.clone()], 3, 1).unwrap();
        let padded = grid_search(&x, &labels, &x, &labels, &[good, bad], 3, 1).unwrap();
        assert_eq!(slim.reports[0].config_index, 0);
        assert_eq!(padded.reports[0].config_index, 0);
        assert_eq!(
            slim.reports[0].test_accuracy,
            padded.reports[0].test_accuracy
        );
    }

    #[test]
    fn evaluation_summary_is_consistent() {
        let (x, y) = oracle_rows(30);
        let labels = vec![y.clone(), y.clone()];
        let result = grid_search(&x, &labels, &x, &labels, &[linear_svm()], 3, 2).unwrap();
        let scaled = result.scaler.transform(&x);
        let summary = evaluate_models(&result.models, &scaled, &labels).unwrap();
        assert_eq!(summary.per_user.len(), 2);
        let max = summary.per_user.iter().copied().fold(0.0f64, f64::max);
        assert!(summary.min <= summary.mean && summary.mean <= max);
    }

    #[test]
    fn majority_share_matches_frequency() {
        assert_eq!(majority_class_share(&[1, 1, 2, 1]), 0.75);
        assert_eq!(majority_class_share(&[]), 0.0);
    }
}
