//! Soft-margin SVM trained by sequential minimal optimization, plus the
//! one-vs-one multiclass wrapper.
//!
//! The working pair is always the maximal-violation pair, so training is
//! fully deterministic: no RNG is involved anywhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::kernel::{kernel_eval_unchecked, KernelSpec};
use crate::scalar::Scalar;

/// Training knobs for one binary classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmTrainConfig<T> {
    pub c: T,
    pub kernel: KernelSpec<T>,
    /// KKT violation below which training stops.
    pub tol: T,
    /// Budget of pair updates.
    pub max_passes: usize,
}

impl<T: Scalar> SvmTrainConfig<T> {
    pub fn new(c: T, kernel: KernelSpec<T>) -> Self {
        SvmTrainConfig {
            c,
            kernel,
            tol: T::from_f64_lossy(1e-3),
            max_passes: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c <= T::zero() {
            return Err(Error::config("svm penalty C must be positive"));
        }
        if self.tol <= T::zero() {
            return Err(Error::config("svm tolerance must be positive"));
        }
        self.kernel.validate()
    }
}

/// One trained binary classifier: f(x) = sum coef_i K(sv_i, x) + bias, where
/// coef_i = alpha_i * y_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmBinary<T> {
    pub support_vectors: Vec<Vec<T>>,
    pub coefficients: Vec<T>,
    pub bias: T,
    pub c: T,
    pub kernel: KernelSpec<T>,
}

impl<T: Scalar> SvmBinary<T> {
    pub fn decision(&self, x: &[T]) -> T {
        let mut f = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.coefficients) {
            f = f + *coef * kernel_eval_unchecked(&self.kernel, sv, x);
        }
        f
    }

    /// Dual variables of the stored support vectors (alpha = |coef| since
    /// labels are unit signs).
    pub fn alphas(&self) -> Vec<T> {
        self.coefficients.iter().map(|c| c.abs()).collect()
    }

    /// Signed sum of the dual variables (should be ~0 by the equality
    /// constraint).
    pub fn dual_balance(&self) -> T {
        let mut acc = T::zero();
        for c in &self.coefficients {
            acc = acc + *c;
        }
        acc
    }
}

/// Train one binary classifier with labels in {-1, +1} via SMO with
/// maximal-violation working pairs.
pub fn train_svm_binary<T: Scalar>(
    x: &[Vec<T>],
    y: &[i8],
    config: &SvmTrainConfig<T>,
) -> Result<SvmBinary<T>> {
    config.validate()?;
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::dimension(format!(
            "{} rows against {} labels",
            n,
            y.len()
        )));
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::TrainingData("labels must be -1 or +1".into()));
    }
    if y.iter().all(|&v| v == 1) || y.iter().all(|&v| v == -1) {
        return Err(Error::TrainingData(
            "binary training needs both label signs".into(),
        ));
    }
    let dim = x[0].len();
    if x.iter().any(|row| row.len() != dim) {
        return Err(Error::dimension("ragged feature rows"));
    }

    let ys: Vec<T> = y
        .iter()
        .map(|&v| if v == 1 { T::one() } else { -T::one() })
        .collect();

    // full kernel matrix; pair subsets stay small enough for this
    let mut kernel = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel_eval_unchecked(&config.kernel, &x[i], &x[j]);
            kernel[i * n + j] = v;
            kernel[j * n + i] = v;
        }
    }
    let k = |i: usize, j: usize| kernel[i * n + j];

    let c = config.c;
    let tau = T::from_f64_lossy(1e-12);
    let mut alpha = vec![T::zero(); n];
    // gradient of the dual objective: G_t = (Q alpha)_t - 1
    let mut grad = vec![-T::one(); n];

    let in_up = |t: usize, alpha: &[T], ys: &[T]| {
        (ys[t] > T::zero() && alpha[t] < c) || (ys[t] < T::zero() && alpha[t] > T::zero())
    };
    let in_low = |t: usize, alpha: &[T], ys: &[T]| {
        (ys[t] > T::zero() && alpha[t] > T::zero()) || (ys[t] < T::zero() && alpha[t] < c)
    };

    let select = |alpha: &[T], grad: &[T]| -> (Option<usize>, Option<usize>, T, T) {
        let mut i = None;
        let mut m = T::neg_infinity();
        let mut j = None;
        let mut mm = T::infinity();
        for t in 0..n {
            let v = -ys[t] * grad[t];
            if in_up(t, alpha, &ys) && v > m {
                m = v;
                i = Some(t);
            }
            if in_low(t, alpha, &ys) && v < mm {
                mm = v;
                j = Some(t);
            }
        }
        (i, j, m, mm)
    };

    for _ in 0..config.max_passes {
        let (i, j, m, mm) = select(&alpha, &grad);
        if m - mm <= config.tol {
            break;
        }
        let (i, j) = match (i, j) {
            (Some(i), Some(j)) => (i, j),
            _ => break,
        };

        // Platt-style two-variable step on (i, j)
        let (lo, hi) = if ys[i] != ys[j] {
            let d = alpha[j] - alpha[i];
            (d.max(T::zero()), (c + d).min(c))
        } else {
            let s = alpha[i] + alpha[j];
            ((s - c).max(T::zero()), s.min(c))
        };
        let eta = (k(i, i) + k(j, j) - (k(i, j) + k(i, j))).max(tau);
        // E_i - E_j in gradient form
        let delta_e = ys[i] * grad[i] - ys[j] * grad[j];
        let target = alpha[j] + ys[j] * delta_e / eta;
        let new_j = target.max(lo).min(hi);
        let delta_j = new_j - alpha[j];
        let delta_i = -ys[i] * ys[j] * delta_j;

        alpha[j] = new_j;
        alpha[i] = (alpha[i] + delta_i).max(T::zero()).min(c);

        for t in 0..n {
            grad[t] = grad[t]
                + ys[t] * ys[i] * k(t, i) * delta_i
                + ys[t] * ys[j] * k(t, j) * delta_j;
        }
    }

    // bias from the final violation interval
    let (_, _, m, mm) = select(&alpha, &grad);
    let bias = if m.is_finite() && mm.is_finite() {
        (m + mm) / T::from_count(2)
    } else if m.is_finite() {
        m
    } else if mm.is_finite() {
        mm
    } else {
        T::zero()
    };

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for t in 0..n {
        if alpha[t] > T::zero() {
            support_vectors.push(x[t].clone());
            coefficients.push(alpha[t] * ys[t]);
        }
    }

    Ok(SvmBinary {
        support_vectors,
        coefficients,
        bias,
        c,
        kernel: config.kernel,
    })
}

/// One-vs-one multiclass SVM: one binary classifier per unordered class pair,
/// prediction by vote with ties going to the lowest class value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmOvO<T> {
    /// Distinct class values seen in training, ascending.
    pub classes: Vec<u32>,
    /// Classifier per pair (classes[a], classes[b]), a < b, in lexicographic
    /// pair order; sign +1 votes for classes[a].
    pub binaries: Vec<SvmBinary<T>>,
}

impl<T: Scalar> SvmOvO<T> {
    pub fn num_pairs(&self) -> usize {
        self.classes.len() * (self.classes.len().saturating_sub(1)) / 2
    }

    /// Vote tally per class (index-aligned with `classes`).
    pub fn votes(&self, x: &[T]) -> Vec<u32> {
        let mut votes = vec![0u32; self.classes.len()];
        let mut idx = 0;
        for a in 0..self.classes.len() {
            for b in a + 1..self.classes.len() {
                let f = self.binaries[idx].decision(x);
                if f > T::zero() {
                    votes[a] += 1;
                } else {
                    votes[b] += 1;
                }
                idx += 1;
            }
        }
        votes
    }
}

/// Train one classifier per class pair found in `labels`.
pub fn train_svm_ovo<T: Scalar>(
    x: &[Vec<T>],
    labels: &[u32],
    config: &SvmTrainConfig<T>,
) -> Result<SvmOvO<T>> {
    if x.len() != labels.len() || x.is_empty() {
        return Err(Error::dimension(format!(
            "{} rows against {} labels",
            x.len(),
            labels.len()
        )));
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let mut binaries = Vec::with_capacity(classes.len() * (classes.len() - 1) / 2);
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            let mut pair_x = Vec::new();
            let mut pair_y = Vec::new();
            for (row, &label) in x.iter().zip(labels) {
                if label == classes[a] {
                    pair_x.push(row.clone());
                    pair_y.push(1i8);
                } else if label == classes[b] {
                    pair_x.push(row.clone());
                    pair_y.push(-1i8);
                }
            }
            binaries.push(train_svm_binary(&pair_x, &pair_y, config)?);
        }
    }
    Ok(SvmOvO { classes, binaries })
}

/// Predict the class of one sample by pairwise voting.
pub fn predict_ovo<T: Scalar>(model: &SvmOvO<T>, x: &[T]) -> u32 {
    if model.classes.len() == 1 {
        return model.classes[0];
    }
    let votes = model.votes(x);
    let mut best = 0usize;
    for (idx, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = idx;
        }
    }
    model.classes[best]
}
