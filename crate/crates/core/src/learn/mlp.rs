//! Multi-layer perceptron classifier trained by minibatch gradient descent
//! with momentum on softmax cross-entropy plus an L2 weight penalty
//! (`alpha/2 * ||W||^2`, biases unregularized).
//!
//! Everything is seeded and sequential, so training the same configuration
//! twice yields bit-identical models.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
}

/// A trained feed-forward network with a softmax output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel<T> {
    /// Class values in ascending order; output k scores `classes[k]`.
    pub classes: Vec<u32>,
    /// Layer widths including input and output.
    pub layers: Vec<usize>,
    /// Per transition: row-major (out x in) weight matrix.
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
    pub alpha: T,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig<T> {
    pub hidden_layers: Vec<usize>,
    pub alpha: T,
    pub activation: Activation,
    pub learning_rate: T,
    pub momentum: T,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Share of training rows held out to detect a plateau (0 disables).
    pub validation_fraction: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl<T: Scalar> MlpConfig<T> {
    pub fn new(hidden_layers: Vec<usize>, alpha: T) -> Self {
        MlpConfig {
            hidden_layers,
            alpha,
            activation: Activation::Relu,
            learning_rate: T::from_f64_lossy(0.01),
            momentum: T::from_f64_lossy(0.9),
            batch_size: 32,
            max_epochs: 200,
            validation_fraction: 0.1,
            patience: 10,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.iter().any(|&h| h == 0) {
            return Err(Error::config("hidden layer sizes must be positive"));
        }
        if self.alpha < T::zero() {
            return Err(Error::config("alpha must be nonnegative"));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::config("batch size and epoch budget must be positive"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::config("validation fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

fn activate<T: Scalar>(kind: Activation, z: T) -> T {
    match kind {
        Activation::Relu => z.max(T::zero()),
        Activation::Tanh => z.tanh(),
    }
}

fn activate_grad<T: Scalar>(kind: Activation, z: T, a: T) -> T {
    match kind {
        Activation::Relu => {
            if z > T::zero() {
                T::one()
            } else {
                T::zero()
            }
        }
        Activation::Tanh => T::one() - a * a,
    }
}

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let mut sum = T::zero();
    for e in &exps {
        sum = sum + *e;
    }
    exps.into_iter().map(|e| e / sum).collect()
}

impl<T: Scalar> MlpModel<T> {
    /// Fresh network with seeded Gaussian init scaled by fan-in.
    pub fn init(
        input: usize,
        hidden: &[usize],
        output: usize,
        alpha: T,
        activation: Activation,
        seed: u64,
    ) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 2);
        layers.push(input);
        layers.extend_from_slice(hidden);
        layers.push(output);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layers.len() - 1 {
            let fan_in = layers[l];
            let scale = match activation {
                Activation::Relu => (2.0 / fan_in as f64).sqrt(),
                Activation::Tanh => (1.0 / fan_in as f64).sqrt(),
            };
            let w: Vec<T> = (0..layers[l] * layers[l + 1])
                .map(|_| {
                    let g: f64 = rng.sample(StandardNormal);
                    T::from_f64_lossy(g * scale)
                })
                .collect();
            weights.push(w);
            biases.push(vec![T::zero(); layers[l + 1]]);
        }
        MlpModel {
            classes: (0..output as u32).collect(),
            layers,
            weights,
            biases,
            alpha,
            activation,
        }
    }

    /// Activations of every layer for one sample (index 0 is the input).
    fn forward(&self, x: &[T]) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
        let depth = self.weights.len();
        let mut acts: Vec<Vec<T>> = Vec::with_capacity(depth + 1);
        let mut zs: Vec<Vec<T>> = Vec::with_capacity(depth);
        acts.push(x.to_vec());
        for l in 0..depth {
            let (n_in, n_out) = (self.layers[l], self.layers[l + 1]);
            let mut z = vec![T::zero(); n_out];
            let prev = &acts[l];
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut acc = self.biases[l][o];
                for (w, a) in row.iter().zip(prev) {
                    acc = acc + *w * *a;
                }
                *zo = acc;
            }
            let a = if l == depth - 1 {
                z.clone() // logits; softmax applied by the consumer
            } else {
                z.iter().map(|&v| activate(self.activation, v)).collect()
            };
            zs.push(z);
            acts.push(a);
        }
        (acts, zs)
    }

    /// Class probabilities for one sample.
    pub fn predict_proba(&self, x: &[T]) -> Vec<T> {
        let (acts, _) = self.forward(x);
        softmax(acts.last().unwrap())
    }

    /// Most probable class value (ties fall to the lowest class).
    pub fn predict(&self, x: &[T]) -> u32 {
        let probs = self.predict_proba(x);
        let mut best = 0usize;
        for (idx, p) in probs.iter().enumerate() {
            if *p > probs[best] {
                best = idx;
            }
        }
        self.classes[best]
    }

    /// Largest absolute weight, handy for regularization checks.
    pub fn max_weight(&self) -> T {
        self.weights
            .iter()
            .flatten()
            .fold(T::zero(), |m, w| m.max(w.abs()))
    }
}

/// Mean cross-entropy over the batch plus the L2 penalty. `targets` are
/// class *indices* into the model's output layer.
pub fn batch_loss<T: Scalar>(model: &MlpModel<T>, x: &[Vec<T>], targets: &[usize]) -> T {
    let n = T::from_usize(x.len()).unwrap();
    let tiny = T::from_f64_lossy(1e-300);
    let mut ce = T::zero();
    for (row, &t) in x.iter().zip(targets) {
        let probs = model.predict_proba(row);
        ce = ce - (probs[t].max(tiny)).ln();
    }
    let mut l2 = T::zero();
    for w in model.weights.iter().flatten() {
        l2 = l2 + *w * *w;
    }
    ce / n + model.alpha * l2 / T::from_count(2)
}

/// Analytic gradients of [`batch_loss`] for every weight and bias.
pub fn batch_gradients<T: Scalar>(
    model: &MlpModel<T>,
    x: &[Vec<T>],
    targets: &[usize],
) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let depth = model.weights.len();
    let mut grad_w: Vec<Vec<T>> = model.weights.iter().map(|w| vec![T::zero(); w.len()]).collect();
    let mut grad_b: Vec<Vec<T>> = model.biases.iter().map(|b| vec![T::zero(); b.len()]).collect();
    let inv_n = T::one() / T::from_usize(x.len()).unwrap();

    for (row, &t) in x.iter().zip(targets) {
        let (acts, zs) = model.forward(row);
        let probs = softmax(&acts[depth]);
        // delta at the output: (softmax - onehot) / n
        let mut delta: Vec<T> = probs
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let target = if k == t { T::one() } else { T::zero() };
                (p - target) * inv_n
            })
            .collect();
        for l in (0..depth).rev() {
            let (n_in, n_out) = (model.layers[l], model.layers[l + 1]);
            for o in 0..n_out {
                grad_b[l][o] = grad_b[l][o] + delta[o];
                let row_grad = &mut grad_w[l][o * n_in..(o + 1) * n_in];
                for (g, a) in row_grad.iter_mut().zip(&acts[l]) {
                    *g = *g + delta[o] * *a;
                }
            }
            if l > 0 {
                let mut next = vec![T::zero(); n_in];
                for (i, nx) in next.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for o in 0..n_out {
                        acc = acc + model.weights[l][o * n_in + i] * delta[o];
                    }
                    *nx = acc * activate_grad(model.activation, zs[l - 1][i], acts[l][i]);
                }
                delta = next;
            }
        }
    }

    for (gw, w) in grad_w.iter_mut().zip(&model.weights) {
        for (g, wv) in gw.iter_mut().zip(w) {
            *g = *g + model.alpha * *wv;
        }
    }
    (grad_w, grad_b)
}

/// Train a classifier on integer class labels. Classes are whatever label
/// values appear in `labels`; the output layer gets one unit per class.
pub fn train_mlp<T: Scalar>(
    x: &[Vec<T>],
    labels: &[u32],
    config: &MlpConfig<T>,
) -> Result<MlpModel<T>> {
    config.validate()?;
    if x.is_empty() || x.len() != labels.len() {
        return Err(Error::dimension(format!(
            "{} rows against {} labels",
            x.len(),
            labels.len()
        )));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::dimension("ragged feature rows"));
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.is_empty() {
        return Err(Error::TrainingData("no training labels".into()));
    }
    let class_index = |label: u32| classes.binary_search(&label).unwrap();
    let targets: Vec<usize> = labels.iter().map(|&l| class_index(l)).collect();

    let mut model = MlpModel::init(
        dim,
        &config.hidden_layers,
        classes.len(),
        config.alpha,
        config.activation,
        config.seed,
    );
    model.classes = classes;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut indices: Vec<usize> = (0..x.len()).collect();
    indices.shuffle(&mut rng);
    let val_len = (config.validation_fraction * x.len() as f64).floor() as usize;
    let use_validation = val_len > 0 && val_len < x.len() && config.patience > 0;
    let (val_idx, train_idx) = indices.split_at(if use_validation { val_len } else { 0 });
    let train_idx: Vec<usize> = train_idx.to_vec();
    let val_idx: Vec<usize> = val_idx.to_vec();

    let mut vel_w: Vec<Vec<T>> = model.weights.iter().map(|w| vec![T::zero(); w.len()]).collect();
    let mut vel_b: Vec<Vec<T>> = model.biases.iter().map(|b| vec![T::zero(); b.len()]).collect();

    let val_x: Vec<Vec<T>> = val_idx.iter().map(|&i| x[i].clone()).collect();
    let val_t: Vec<usize> = val_idx.iter().map(|&i| targets[i]).collect();
    let mut best_val = T::infinity();
    let mut best_state: Option<(Vec<Vec<T>>, Vec<Vec<T>>)> = None;
    let mut stale = 0usize;

    let mut order = train_idx.clone();
    for _epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch_x: Vec<Vec<T>> = chunk.iter().map(|&i| x[i].clone()).collect();
            let batch_t: Vec<usize> = chunk.iter().map(|&i| targets[i]).collect();
            let (gw, gb) = batch_gradients(&model, &batch_x, &batch_t);
            for l in 0..model.weights.len() {
                for (idx, g) in gw[l].iter().enumerate() {
                    vel_w[l][idx] = config.momentum * vel_w[l][idx] - config.learning_rate * *g;
                    model.weights[l][idx] = model.weights[l][idx] + vel_w[l][idx];
                }
                for (idx, g) in gb[l].iter().enumerate() {
                    vel_b[l][idx] = config.momentum * vel_b[l][idx] - config.learning_rate * *g;
                    model.biases[l][idx] = model.biases[l][idx] + vel_b[l][idx];
                }
            }
        }
        if use_validation {
            let val_loss = batch_loss(&model, &val_x, &val_t);
            if val_loss < best_val {
                best_val = val_loss;
                best_state = Some((model.weights.clone(), model.biases.clone()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.patience {
                    break;
                }
            }
        }
    }
    if let Some((w, b)) = best_state {
        model.weights = w;
        model.biases = b;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_data() -> (Vec<Vec<f64>>, Vec<u32>) {
        // three linearly separable blobs
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (cls, cx, cy) in [(0u32, 0.0, 0.0), (1, 4.0, 0.0), (2, 0.0, 4.0)] {
            for d in [-0.3, 0.0, 0.3] {
                x.push(vec![cx + d, cy - d]);
                y.push(cls);
            }
        }
        (x, y)
    }

    fn numeric_gradient_check(model: &MlpModel<f64>, x: &[Vec<f64>], t: &[usize]) -> f64 {
        let (gw, gb) = batch_gradients(model, x, t);
        let mut worst: f64 = 0.0;
        let mut probe = model.clone();
        for l in 0..model.weights.len() {
            for idx in 0..model.weights[l].len() {
                let orig = model.weights[l][idx];
                let h = 1e-5 * orig.abs().max(1.0);
                probe.weights[l][idx] = orig + h;
                let up = batch_loss(&probe, x, t);
                probe.weights[l][idx] = orig - h;
                let down = batch_loss(&probe, x, t);
                probe.weights[l][idx] = orig;
                let numeric = (up - down) / (2.0 * h);
                let analytic = gw[l][idx];
                worst = worst.max(
                    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0),
                );
            }
            for idx in 0..model.biases[l].len() {
                let orig = model.biases[l][idx];
                let h = 1e-5 * orig.abs().max(1.0);
                probe.biases[l][idx] = orig + h;
                let up = batch_loss(&probe, x, t);
                probe.biases[l][idx] = orig - h;
                let down = batch_loss(&probe, x, t);
                probe.biases[l][idx] = orig;
                let numeric = (up - down) / (2.0 * h);
                let analytic = gb[l][idx];
                worst = worst.max(
                    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0),
                );
            }
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        let x = vec![
            vec![0.3, -0.8, 1.2],
            vec![-1.1, 0.4, 0.0],
            vec![0.9, 0.9, -0.5],
        ];
        let t = vec![0usize, 2, 1];
        for activation in [Activation::Tanh, Activation::Relu] {
            for seed in [1u64, 2, 3] {
                let model =
                    MlpModel::<f64>::init(3, &[5, 4], 3, 0.01, activation, seed);
                let worst = numeric_gradient_check(&model, &x, &t);
                assert!(
                    worst < 1e-5,
                    "{activation:?} seed {seed}: worst relative error {worst}"
                );
            }
        }
    }

    #[test]
    fn softmax_rows_are_distributions() {
        let model = MlpModel::<f64>::init(4, &[6], 3, 0.0, Activation::Relu, 9);
        for k in 0..50 {
            let x: Vec<f64> = (0..4).map(|i| ((k * 7 + i * 3) % 11) as f64 - 5.0).collect();
            let p = model.predict_proba(&x);
            assert!(p.iter().all(|&v| v >= 0.0));
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
        }
    }

    #[test]
    fn learns_separable_blobs() {
        let (x, y) = toy_data();
        let mut config = MlpConfig::new(vec![16], 1e-4);
        config.validation_fraction = 0.0;
        config.max_epochs = 400;
        config.seed = 5;
        let model = train_mlp(&x, &y, &config).unwrap();
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(row, &label)| model.predict(row) == label)
            .count();
        assert_eq!(correct, x.len());
    }

    #[test]
    fn huge_alpha_collapses_to_the_majority_class() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..12 {
            x.push(vec![i as f64, (i % 3) as f64]);
            y.push(if i < 8 { 1u32 } else { 2 }); // class 1 dominates
        }
        let mut config = MlpConfig::new(vec![8], 1e6);
        config.validation_fraction = 0.0;
        config.max_epochs = 100;
        let model = train_mlp(&x, &y, &config).unwrap();
        assert!(model.max_weight() < 1e-2, "weights {}", model.max_weight());
        for row in &x {
            assert_eq!(model.predict(row), 1);
        }
    }

    #[test]
    fn seeded_training_is_byte_identical() {
        let (x, y) = toy_data();
        let mut config = MlpConfig::new(vec![8, 4], 1e-3);
        config.max_epochs = 30;
        config.seed = 11;
        let a = train_mlp(&x, &y, &config).unwrap();
        let b = train_mlp(&x, &y, &config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn empty_input_is_rejected() {
        let config = MlpConfig::<f64>::new(vec![4], 0.001);
        assert!(train_mlp::<f64>(&[], &[], &config).is_err());
    }

    #[test]
    fn class_values_survive_the_round_trip() {
        let x = vec![vec![0.0], vec![10.0], vec![0.2], vec![9.8]];
        let y = vec![3u32, 7, 3, 7]; // non-contiguous class values
        let mut config = MlpConfig::new(vec![6], 1e-4);
        config.validation_fraction = 0.0;
        config.max_epochs = 300;
        let model = train_mlp(&x, &y, &config).unwrap();
        assert_eq!(model.classes, vec![3, 7]);
        assert_eq!(model.predict(&[0.1]), 3);
        assert_eq!(model.predict(&[9.9]), 7);
    }
}
