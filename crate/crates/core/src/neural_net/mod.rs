//! A from-scratch multilayer perceptron usable as a classifier (softmax with
//! cross-entropy) or a regressor (identity with squared error).
//!
//! Hidden layers share one width and one activation. Training uses
//! mini-batch `sgd` (with momentum and a learning-rate schedule) or `adam`,
//! with early stopping on a held-out validation fraction.

mod config;
mod model;
mod train;

pub use config::{
    Activation, LearningRateSchedule, MlpConfig, OutputMode, Solver, TrainOptions, HIDDEN_LAYERS_RANGE, HIDDEN_SIZE_RANGE,
    MAX_ITER_RANGE, UNIT_RANGE,
};
pub use model::{Gradients, Layer, MlpModel};
pub use train::{argmax, TrainReport, MIN_TRAINING_ROWS};
