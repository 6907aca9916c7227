use rand::seq::SliceRandom;

use super::config::{LearningRateSchedule, OutputMode, Solver};
use super::model::{Gradients, MlpModel};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;

/// Minimum number of rows accepted by [`MlpModel::train`].
pub const MIN_TRAINING_ROWS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport<T: Scalar> {
    /// Validation loss of the returned weights.
    pub best_validation_loss: T,
    pub epochs_run: usize,
    pub stopped_early: bool,
    /// Whether the first attempt diverged and training was rerun at a tenth of the rate.
    pub restarted: bool,
    /// Mean pre-update mini-batch loss of each epoch.
    pub train_loss_history: Vec<T>,
    pub validation_loss_history: Vec<T>,
}

enum Outcome<T: Scalar> {
    Done(TrainReport<T>),
    Diverged(String),
}

struct OptimizerState<T: Scalar> {
    velocity: Gradients<T>,
    second: Gradients<T>,
    step: i32,
}

impl<T: Scalar> MlpModel<T> {
    /// One-hot targets for class labels `0..output_dim`.
    pub fn one_hot(&self, labels: &[usize]) -> Vec<Vec<T>> {
        labels
            .iter()
            .map(|&c| {
                let mut v = vec![T::zero(); self.output_dim];
                v[c] = T::one();
                v
            })
            .collect()
    }

    /// Trains in place with early stopping on a held-out validation split and
    /// leaves the model at the best validation loss seen.
    ///
    /// On a non-finite loss the weights are redrawn and training restarts once
    /// at a tenth of the base learning rate.
    pub fn train(&mut self, inputs: &[Vec<T>], targets: &[Vec<T>]) -> Result<TrainReport<T>> {
        if inputs.len() < MIN_TRAINING_ROWS {
            return Err(Error::range("training rows", inputs.len(), format!(">= {MIN_TRAINING_ROWS}")));
        }
        self.check_batch(inputs, targets)?;
        if inputs.iter().chain(targets).flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite training data".into()));
        }
        let initial = self.layers.clone();
        let base = self.options.learning_rate;
        match self.train_attempt(inputs, targets, base) {
            Outcome::Done(r) => Ok(r),
            Outcome::Diverged(first) => {
                log::debug!("mlp diverged ({first}); restarting at learning rate {}", base / 10.0);
                self.layers = initial;
                match self.train_attempt(inputs, targets, base / 10.0) {
                    Outcome::Done(mut r) => {
                        r.restarted = true;
                        Ok(r)
                    }
                    Outcome::Diverged(second) => Err(Error::Divergence(second)),
                }
            }
        }
    }

    /// Splits rows into (train, validation) indices: the last
    /// `ceil(fraction * n)` rows of a seeded shuffle are held out.
    pub fn validation_split(&self, n: usize) -> (Vec<usize>, Vec<usize>) {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng_from_seed(derive_seed(self.seed, "mlp-validation")));
        let n_val = ((self.config.validation_fraction * n as f64).ceil() as usize).clamp(1, n - 1);
        let val = idx.split_off(n - n_val);
        (idx, val)
    }

    fn train_attempt(&mut self, inputs: &[Vec<T>], targets: &[Vec<T>], base_lr: f64) -> Outcome<T> {
        let (mut train_idx, val_idx) = self.validation_split(inputs.len());
        let val_loss = |m: &MlpModel<T>| m.loss_unchecked(val_idx.iter().map(|&i| (&inputs[i], &targets[i])));
        let mut shuffle_rng = rng_from_seed(derive_seed(self.seed, "mlp-batches"));
        let batch = self.options.batch_size.min(train_idx.len());
        let opts = self.options;
        let cfg = self.config;

        let mut state = OptimizerState {
            velocity: Gradients::zeros_like(self),
            second: Gradients::zeros_like(self),
            step: 0,
        };
        let mut lr = base_lr;
        let mut best_loss = val_loss(self);
        if !best_loss.is_finite() {
            return Outcome::Diverged("non-finite initial validation loss".into());
        }
        let mut best_layers = self.layers.clone();
        let mut plateau_ref = best_loss;
        let mut since_improvement = 0usize;
        let mut adaptive_ref = best_loss;
        let mut adaptive_wait = 0usize;
        let mut report = TrainReport {
            best_validation_loss: best_loss,
            epochs_run: 0,
            stopped_early: false,
            restarted: false,
            train_loss_history: Vec::new(),
            validation_loss_history: Vec::new(),
        };

        for epoch in 1..=cfg.max_iter {
            train_idx.shuffle(&mut shuffle_rng);
            if cfg.solver == Solver::Sgd && cfg.learning_rate_schedule == LearningRateSchedule::Invscaling {
                lr = base_lr / (epoch as f64).powf(opts.invscaling_power);
            }
            let mut epoch_loss = T::zero();
            let mut n_batches = 0usize;
            for chunk in train_idx.chunks(batch) {
                let (loss, grads) = self.gradient_unchecked(chunk.iter().map(|&i| (&inputs[i], &targets[i])));
                if !loss.is_finite() {
                    return Outcome::Diverged(format!("non-finite training loss at epoch {epoch}"));
                }
                epoch_loss += loss;
                n_batches += 1;
                self.apply_update(&grads, &mut state, lr);
            }
            let v = val_loss(self);
            if !v.is_finite() || !self.is_finite() {
                return Outcome::Diverged(format!("non-finite validation loss at epoch {epoch}"));
            }
            report.train_loss_history.push(epoch_loss / T::from_count(n_batches));
            report.validation_loss_history.push(v);
            report.epochs_run = epoch;

            if v < best_loss {
                best_loss = v;
                best_layers.clone_from(&self.layers);
            }
            if v < plateau_ref - T::lit(opts.tolerance) {
                plateau_ref = v;
                since_improvement = 0;
            } else {
                since_improvement += 1;
            }
            if cfg.solver == Solver::Sgd && cfg.learning_rate_schedule == LearningRateSchedule::Adaptive {
                if v < adaptive_ref {
                    adaptive_ref = v;
                    adaptive_wait = 0;
                } else {
                    adaptive_wait += 1;
                    if adaptive_wait >= opts.adaptive_patience {
                        lr /= opts.adaptive_factor;
                        adaptive_wait = 0;
                    }
                }
            }
            if since_improvement >= opts.patience {
                report.stopped_early = true;
                break;
            }
        }
        self.layers = best_layers;
        report.best_validation_loss = best_loss;
        Outcome::Done(report)
    }

    fn apply_update(&mut self, grads: &Gradients<T>, state: &mut OptimizerState<T>, lr: f64) {
        let lr = T::lit(lr);
        match self.config.solver {
            Solver::Sgd => {
                let mu = T::lit(self.config.momentum);
                for (k, layer) in self.layers.iter_mut().enumerate() {
                    let params = layer.weights.iter_mut().chain(layer.biases.iter_mut());
                    let vel = state.velocity.weights[k].iter_mut().chain(state.velocity.biases[k].iter_mut());
                    let g = grads.weights[k].iter().chain(&grads.biases[k]);
                    for ((p, v), &g) in params.zip(vel).zip(g) {
                        *v = mu * *v - lr * g;
                        *p += *v;
                    }
                }
            }
            Solver::Adam => {
                state.step += 1;
                let b1 = T::lit(self.config.beta1);
                let b2 = T::lit(self.config.beta2);
                let eps = T::lit(self.options.epsilon);
                let c1 = T::one() - b1.powi(state.step);
                let c2 = T::one() - b2.powi(state.step);
                for (k, layer) in self.layers.iter_mut().enumerate() {
                    let params = layer.weights.iter_mut().chain(layer.biases.iter_mut());
                    let m1 = state.velocity.weights[k].iter_mut().chain(state.velocity.biases[k].iter_mut());
                    let m2 = state.second.weights[k].iter_mut().chain(state.second.biases[k].iter_mut());
                    let g = grads.weights[k].iter().chain(&grads.biases[k]);
                    for (((p, m), v), &g) in params.zip(m1).zip(m2).zip(g) {
                        *m = b1 * *m + (T::one() - b1) * g;
                        *v = b2 * *v + (T::one() - b2) * g * g;
                        let m_hat = *m / c1;
                        let v_hat = *v / c2;
                        *p -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
    }

    /// Fraction of rows whose argmax output equals the label. Classifier only.
    pub fn accuracy(&self, inputs: &[Vec<T>], labels: &[usize]) -> Result<f64> {
        if self.output_mode != OutputMode::Classifier {
            return Err(Error::Invariant("accuracy needs a classifier".into()));
        }
        let mut hits = 0usize;
        for (x, &y) in inputs.iter().zip(labels) {
            if argmax(&self.predict(x)?) == y {
                hits += 1;
            }
        }
        Ok(hits as f64 / inputs.len().max(1) as f64)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
