use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Logistic,
    Identity,
}

impl Activation {
    pub const ALL: [Activation; 4] = [Activation::Relu, Activation::Tanh, Activation::Logistic, Activation::Identity];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Sgd,
    Adam,
}

impl Solver {
    pub const ALL: [Solver; 2] = [Solver::Sgd, Solver::Adam];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Sgd => "sgd",
            Solver::Adam => "adam",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearningRateSchedule {
    Constant,
    Invscaling,
    Adaptive,
}

impl LearningRateSchedule {
    pub const ALL: [LearningRateSchedule; 3] = [
        LearningRateSchedule::Constant,
        LearningRateSchedule::Invscaling,
        LearningRateSchedule::Adaptive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearningRateSchedule::Constant => "constant",
            LearningRateSchedule::Invscaling => "invscaling",
            LearningRateSchedule::Adaptive => "adaptive",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    /// Softmax outputs, cross-entropy loss.
    Classifier,
    /// Identity outputs, half squared-error loss.
    Regressor,
}

pub const HIDDEN_LAYERS_RANGE: (usize, usize) = (1, 20);
pub const HIDDEN_SIZE_RANGE: (usize, usize) = (5, 100);
pub const MAX_ITER_RANGE: (usize, usize) = (100, 500);
pub const UNIT_RANGE: (f64, f64) = (0.01, 0.99);

/// The ten MLP hyperparameters. `learning_rate_schedule` and `momentum` are
/// only read by `sgd`; `beta1` and `beta2` only by `adam`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden_layers: usize,
    pub hidden_layer_size: usize,
    pub activation: Activation,
    pub solver: Solver,
    pub learning_rate_schedule: LearningRateSchedule,
    pub max_iter: usize,
    pub momentum: f64,
    pub validation_fraction: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for MlpConfig {
    /// One hidden layer of 32 relu units trained with adam.
    fn default() -> Self {
        MlpConfig {
            hidden_layers: 1,
            hidden_layer_size: 32,
            activation: Activation::Relu,
            solver: Solver::Adam,
            learning_rate_schedule: LearningRateSchedule::Constant,
            max_iter: 200,
            momentum: 0.9,
            validation_fraction: 0.1,
            beta1: 0.9,
            beta2: 0.9,
        }
    }
}

fn check_int(field: &str, v: usize, (lo, hi): (usize, usize)) -> Result<()> {
    if v < lo || v > hi {
        return Err(Error::range(field, v, format!("{lo}-{hi}")));
    }
    Ok(())
}

fn check_unit(field: &str, v: f64) -> Result<()> {
    let (lo, hi) = UNIT_RANGE;
    if !(lo..=hi).contains(&v) {
        return Err(Error::range(field, v, format!("{lo}-{hi}")));
    }
    Ok(())
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        check_int("hidden_layers", self.hidden_layers, HIDDEN_LAYERS_RANGE)?;
        check_int("hidden_layer_size", self.hidden_layer_size, HIDDEN_SIZE_RANGE)?;
        check_int("max_iter", self.max_iter, MAX_ITER_RANGE)?;
        check_unit("momentum", self.momentum)?;
        check_unit("validation_fraction", self.validation_fraction)?;
        check_unit("beta1", self.beta1)?;
        check_unit("beta2", self.beta2)?;
        Ok(())
    }
}

/// Optimizer constants outside the searched hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epsilon: f64,
    pub patience: usize,
    pub tolerance: f64,
    pub invscaling_power: f64,
    /// Epochs without validation improvement before `adaptive` divides the rate.
    pub adaptive_patience: usize,
    pub adaptive_factor: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            learning_rate: 1e-3,
            batch_size: 32,
            epsilon: 1e-8,
            patience: 10,
            tolerance: 1e-4,
            invscaling_power: 0.5,
            adaptive_patience: 2,
            adaptive_factor: 5.0,
        }
    }
}

impl TrainOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::range("learning_rate", self.learning_rate, "> 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::range("batch_size", 0, ">= 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::range("epsilon", self.epsilon, "> 0"));
        }
        if self.patience == 0 {
            return Err(Error::range("patience", 0, ">= 1"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::range("tolerance", self.tolerance, ">= 0"));
        }
        if !(self.adaptive_factor > 1.0) {
            return Err(Error::range("adaptive_factor", self.adaptive_factor, "> 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        MlpConfig::default().validate().unwrap();
        TrainOptions::default().validate().unwrap();
    }

    #[test]
    fn too_many_hidden_layers() {
        let c = MlpConfig {
            hidden_layers: 21,
            ..MlpConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Range { .. })));
    }

    #[test]
    fn unit_interval_bounds() {
        let c = MlpConfig {
            beta2: 0.995,
            ..MlpConfig::default()
        };
        assert!(c.validate().is_err());
        let c = MlpConfig {
            momentum: 0.0,
            ..MlpConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
