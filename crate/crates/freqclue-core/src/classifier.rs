//! Binary linear head over fused features: feature standardization, logistic
//! regression trained with Adam, accuracy-plateau learning-rate decay.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::accuracy;
use crate::pipeline::FeatureRecord;
use crate::util;

/// Per-dimension train-set statistics applied before the head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows[0].len();
        let count = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in rows {
            for (m, &v) in mean.iter_mut().zip(*row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= count;
        }
        let mut std = vec![0.0; dim];
        for row in rows {
            for ((s, &v), &m) in std.iter_mut().zip(*row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut std {
            *s = (*s / count).sqrt().max(1e-12);
        }
        Self { mean, std }
    }

    fn apply(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect()
    }
}

/// Trained (or zero-initialized) logistic head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    pub dimension: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub trained: bool,
    pub standardization: Standardization,
    /// Config fingerprint of the feature file the head was trained on.
    pub fingerprint: String,
}

impl LinearHead {
    /// Fake-class probability of one feature vector.
    pub fn score(&self, values: &[f64]) -> Result<f64> {
        if !self.trained {
            return Err(Error::UntrainedHead);
        }
        if values.len() != self.weights.len() {
            return Err(Error::shape(
                "score",
                format!("{} values", self.weights.len()),
                format!("{}", values.len()),
            ));
        }
        let x = self.standardization.apply(values);
        let z: f64 = self
            .weights
            .iter()
            .zip(&x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias;
        Ok(sigmoid(z))
    }

    /// Score a whole feature set, pairing each probability with its label.
    pub fn score_records(
        &self,
        records: &[FeatureRecord],
    ) -> Result<Vec<(f64, crate::data::manifest::Label)>> {
        records
            .iter()
            .map(|r| Ok((self.score(&r.values)?, r.label)))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("head serializes");
        util::write_atomic(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let head: Self = serde_json::from_slice(&bytes)
            .map_err(|e| Error::format("head file", format!("{}: {e}", path.display())))?;
        if head.weights.len() != head.dimension
            || head.standardization.mean.len() != head.dimension
            || head.standardization.std.len() != head.dimension
        {
            return Err(Error::format(
                "head file",
                format!(
                    "{}: dimension {} disagrees with stored vectors",
                    path.display(),
                    head.dimension
                ),
            ));
        }
        Ok(head)
    }
}

/// Optimizer and schedule settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Epochs without a strict validation-accuracy improvement before the
    /// learning rate drops.
    pub patience: usize,
    /// Division factor on plateau.
    pub lr_decay: f64,
    pub min_lr: f64,
    pub adam_epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            lr: 1e-4,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            patience: 5,
            lr_decay: 10.0,
            min_lr: 1e-7,
            adam_epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if beta.is_nan() || beta <= 0.0 || beta >= 1.0 {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {beta}")));
            }
        }
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::Config(format!("lr must be > 0, got {}", self.lr)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Accuracy-plateau learning-rate schedule: a strictly higher validation
/// accuracy resets the patience counter; when it expires the rate divides by
/// the decay factor, never below the floor.
#[derive(Debug, Clone)]
pub struct PlateauSchedule {
    lr: f64,
    best: f64,
    stale: usize,
    patience: usize,
    decay: f64,
    min_lr: f64,
}

impl PlateauSchedule {
    pub fn new(config: &TrainConfig) -> Self {
        Self {
            lr: config.lr,
            best: f64::NEG_INFINITY,
            stale: 0,
            patience: config.patience,
            decay: config.lr_decay,
            min_lr: config.min_lr,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Feed one epoch's validation accuracy.
    pub fn observe(&mut self, accuracy: f64) {
        if accuracy > self.best {
            self.best = accuracy;
            self.stale = 0;
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                self.lr = (self.lr / self.decay).max(self.min_lr);
                self.stale = 0;
            }
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy and its gradient at (weights, bias) over
/// standardized rows. Targets are 1 for fake, 0 for real.
pub fn bce_loss_and_grad(
    weights: &[f64],
    bias: f64,
    rows: &[Vec<f64>],
    targets: &[f64],
) -> (f64, Vec<f64>, f64) {
    let count = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &y) in rows.iter().zip(targets) {
        let z: f64 = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
        // stable BCE: max(z, 0) - z*y + ln(1 + exp(-|z|))
        loss += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
        let residual = sigmoid(z) - y;
        for (g, &v) in grad_w.iter_mut().zip(row) {
            *g += residual * v;
        }
        grad_b += residual;
    }
    loss /= count;
    for g in &mut grad_w {
        *g /= count;
    }
    grad_b /= count;
    (loss, grad_w, grad_b)
}

/// Adam state over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl Adam {
    pub fn new(dim: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            beta1,
            beta2,
            epsilon,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    /// One update of `params` in place given `grads` and the current
    /// learning rate.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.t += 1;
        let bias1 = 1.0 - self.beta1.powi(self.t as i32);
        let bias2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Fit a logistic head on labeled features. Validation features (falling
/// back to the training set) drive the accuracy-plateau schedule: a strictly
/// higher accuracy resets the patience counter; on expiry the learning rate
/// divides by `lr_decay` down to `min_lr`.
pub fn train(
    features: &[FeatureRecord],
    validation: Option<&[FeatureRecord]>,
    config: &TrainConfig,
) -> Result<LinearHead> {
    config.validate()?;
    if features.is_empty() {
        return Err(Error::DegenerateData("empty training set".into()));
    }
    let dim = features[0].values.len();
    for record in features {
        if record.values.len() != dim {
            return Err(Error::shape(
                "train",
                format!("{dim} values per record"),
                format!("record '{}' has {}", record.id, record.values.len()),
            ));
        }
        if record.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("feature values of '{}'", record.id),
            });
        }
    }
    let fakes = features.iter().filter(|r| r.label.is_fake()).count();
    if fakes == 0 || fakes == features.len() {
        return Err(Error::DegenerateData(format!(
            "training set has {fakes} fake of {} total; need both classes",
            features.len()
        )));
    }

    let raw_rows: Vec<&[f64]> = features.iter().map(|r| r.values.as_slice()).collect();
    let standardization = Standardization::fit(&raw_rows);
    let rows: Vec<Vec<f64>> = raw_rows
        .iter()
        .map(|r| standardization.apply(r))
        .collect();
    let targets: Vec<f64> = features.iter().map(|r| r.label.target()).collect();

    let mut head = LinearHead {
        dimension: dim,
        weights: vec![0.0; dim],
        bias: 0.0,
        trained: true,
        standardization,
        fingerprint: features[0].fingerprint.clone(),
    };

    if config.epochs == 0 {
        return Ok(head);
    }

    let val_set = validation.unwrap_or(features);
    let mut params = vec![0.0f64; dim + 1];
    let mut adam = Adam::new(dim + 1, config.beta1, config.beta2, config.adam_epsilon);
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut schedule = PlateauSchedule::new(config);
    let mut order: Vec<usize> = (0..rows.len()).collect();

    for _epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let batch_rows: Vec<Vec<f64>> = batch.iter().map(|&i| rows[i].clone()).collect();
            let batch_targets: Vec<f64> = batch.iter().map(|&i| targets[i]).collect();
            let (_, grad_w, grad_b) =
                bce_loss_and_grad(&params[..dim], params[dim], &batch_rows, &batch_targets);
            let mut grads = grad_w;
            grads.push(grad_b);
            adam.step(&mut params, &grads, schedule.lr());
        }

        head.weights.copy_from_slice(&params[..dim]);
        head.bias = params[dim];
        let scored = head.score_records(val_set)?;
        schedule.observe(accuracy(&scored, 0.5)?);
    }

    head.weights.copy_from_slice(&params[..dim]);
    head.bias = params[dim];
    Ok(head)
}
