use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::knowledge_set::{stratified_kfold, KnowledgeSet};
use super::model::{fit_standardization, Standardization};
use crate::error::{Error, Result};
use crate::hpo::{ga_optimize, Configuration, Dimension, GaParams, ParamValue, RunControl, SearchSpace};
use crate::meta_features::{feature_name, FEATURE_COUNT};
use crate::neural_net::{
    Activation, LearningRateSchedule, MlpConfig, MlpModel, OutputMode, Solver, HIDDEN_LAYERS_RANGE, HIDDEN_SIZE_RANGE, MAX_ITER_RANGE,
    UNIT_RANGE,
};
use crate::rng::{derive_indexed, derive_seed};

/// Feature-subset search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSelectionConfig {
    pub ga: GaParams,
    pub time_limit_secs: Option<f64>,
    pub folds: usize,
    /// Classifier trained inside the fitness function.
    pub mlp: MlpConfig,
    /// Candidate features as 0-based indices into f1..f23.
    pub candidates: Vec<usize>,
}

impl Default for FeatureSelectionConfig {
    fn default() -> Self {
        FeatureSelectionConfig {
            ga: GaParams::default(),
            time_limit_secs: None,
            folds: 5,
            mlp: MlpConfig::default(),
            candidates: (0..FEATURE_COUNT).collect(),
        }
    }
}

/// Architecture search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchitectureSearchConfig {
    pub ga: GaParams,
    pub time_limit_secs: Option<f64>,
    pub folds: usize,
    /// Search stops once the fitness `-MSE` reaches this value.
    pub precision: f64,
}

impl Default for ArchitectureSearchConfig {
    fn default() -> Self {
        ArchitectureSearchConfig {
            ga: GaParams::default(),
            time_limit_secs: None,
            folds: 5,
            precision: -0.0015,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    /// Selected 0-based feature indices, ascending.
    pub features: Vec<usize>,
    pub cv_accuracy: f64,
    pub evaluations: usize,
}

impl FeatureSelection {
    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|&i| feature_name(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSearch {
    pub config: MlpConfig,
    pub cv_mse: f64,
    pub evaluations: usize,
    pub reached_precision: bool,
}

fn standardized(rows: &[Vec<f64>], stats: &[Standardization]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().zip(stats).map(|(x, s)| (x - s.mean) / s.std.max(1e-12)).collect())
        .collect()
}

fn split<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

/// k-fold CV accuracy of an MLP classifier on the given feature columns.
pub fn classifier_cv_accuracy(knowledge: &KnowledgeSet, features: &[usize], mlp: MlpConfig, folds: usize, seed: u64) -> Result<f64> {
    if features.is_empty() {
        return Err(Error::Invariant("empty feature subset".into()));
    }
    let rows = knowledge.feature_rows(features);
    let x = standardized(&rows, &fit_standardization(&rows, features.len()));
    let labels = knowledge.labels();
    let n_out = knowledge.portfolio_names.len();
    let folds = stratified_kfold(&labels, folds, seed);
    let mut total = 0.0;
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..x.len()).filter(|i| !test.contains(i)).collect();
        let mut model = MlpModel::<f64>::init(mlp, features.len(), n_out, OutputMode::Classifier, derive_indexed(seed, "fold-model", f as u64))?;
        let targets = model.one_hot(&split(&labels, &train));
        model.train(&split(&x, &train), &targets)?;
        total += model.accuracy(&split(&x, test), &split(&labels, test))?;
    }
    Ok(total / folds.len() as f64)
}

/// k-fold CV mean squared error (over rows and outputs) of an MLP regressor on masked targets.
pub fn regressor_cv_mse(knowledge: &KnowledgeSet, features: &[usize], mlp: MlpConfig, folds: usize, seed: u64) -> Result<f64> {
    let rows = knowledge.feature_rows(features);
    let x = standardized(&rows, &fit_standardization(&rows, features.len()));
    let y = knowledge.targets();
    let n_out = knowledge.portfolio_names.len();
    let folds = stratified_kfold(&knowledge.labels(), folds, seed);
    let (mut sq, mut count) = (0.0, 0usize);
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..x.len()).filter(|i| !test.contains(i)).collect();
        let mut model = MlpModel::<f64>::init(mlp, features.len(), n_out, OutputMode::Regressor, derive_indexed(seed, "fold-model", f as u64))?;
        model.train(&split(&x, &train), &split(&y, &train))?;
        for &i in test {
            let out = model.predict(&x[i])?;
            sq += out.iter().zip(&y[i]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            count += n_out;
        }
    }
    let mse = sq / count as f64;
    if mse.is_finite() {
        Ok(mse)
    } else {
        Err(Error::Numerical("non-finite cross-validated MSE".into()))
    }
}

/// GA over one boolean per candidate feature; fitness is k-fold accuracy of
/// the configured MLP classifier. An all-false winner is never returned.
pub fn select_features(knowledge: &KnowledgeSet, config: &FeatureSelectionConfig, seed: u64) -> Result<FeatureSelection> {
    knowledge.check_trainable()?;
    if config.candidates.is_empty() {
        return Err(Error::Empty("candidate features"));
    }
    let space = SearchSpace::new(config.candidates.iter().map(|&i| Dimension::boolean(feature_name(i))).collect())?;
    let chosen = |c: &Configuration| -> Vec<usize> {
        config
            .candidates
            .iter()
            .zip(&c.0)
            .filter(|(_, v)| v.as_bool() == Some(true))
            .map(|(&i, _)| i)
            .collect()
    };
    let cv_seed = derive_seed(seed, "feature-cv");
    let objective = |c: &Configuration| classifier_cv_accuracy(knowledge, &chosen(c), config.mlp, config.folds, cv_seed);
    let control = RunControl {
        seed: derive_seed(seed, "feature-ga"),
        time_limit: config.time_limit_secs.map(Duration::from_secs_f64),
        ..RunControl::default()
    };
    let result = ga_optimize(&space, &objective, &config.ga, &control)?;
    let mut best: Option<(&Configuration, f64)> = None;
    for e in &result.history {
        if !chosen(&e.configuration).is_empty() && best.map_or(true, |b| e.score > b.1) {
            best = Some((&e.configuration, e.score));
        }
    }
    let (c, score) = best.ok_or_else(|| Error::Knowledge("no feature subset could be evaluated".into()))?;
    let mut features = chosen(c);
    features.sort_unstable();
    Ok(FeatureSelection {
        features,
        cv_accuracy: score,
        evaluations: result.evaluation_count,
    })
}

/// The ten MLP hyperparameters as a search space (`sgd`/`adam` solvers).
pub fn mlp_search_space() -> SearchSpace {
    let int = |name: &str, (lo, hi): (usize, usize)| Dimension::integer(name, lo as i64, hi as i64);
    let unit = |name: &str| Dimension::real(name, UNIT_RANGE.0, UNIT_RANGE.1);
    SearchSpace::new(vec![
        int("hidden_layers", HIDDEN_LAYERS_RANGE),
        int("hidden_layer_size", HIDDEN_SIZE_RANGE),
        Dimension::categorical("activation", Activation::ALL.map(Activation::name)),
        Dimension::categorical("solver", Solver::ALL.map(Solver::name)),
        Dimension::categorical("learning_rate_schedule", LearningRateSchedule::ALL.map(LearningRateSchedule::name)),
        int("max_iter", MAX_ITER_RANGE),
        unit("momentum"),
        unit("validation_fraction"),
        unit("beta1"),
        unit("beta2"),
    ])
    .expect("static space is valid")
}

/// Decodes a configuration of [`mlp_search_space`].
pub fn mlp_config_from(c: &Configuration) -> Result<MlpConfig> {
    mlp_search_space().check(c)?;
    let v = &c.0;
    let int = |i: usize| v[i].as_int().unwrap() as usize;
    let real = |i: usize| v[i].as_real().unwrap();
    let cfg = MlpConfig {
        hidden_layers: int(0),
        hidden_layer_size: int(1),
        activation: Activation::from_name(v[2].as_str().unwrap()).unwrap(),
        solver: Solver::from_name(v[3].as_str().unwrap()).unwrap(),
        learning_rate_schedule: LearningRateSchedule::from_name(v[4].as_str().unwrap()).unwrap(),
        max_iter: int(5),
        momentum: real(6),
        validation_fraction: real(7),
        beta1: real(8),
        beta2: real(9),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Encodes an MLP config as a configuration of [`mlp_search_space`].
pub fn mlp_config_to(cfg: &MlpConfig) -> Configuration {
    Configuration(vec![
        ParamValue::Int(cfg.hidden_layers as i64),
        ParamValue::Int(cfg.hidden_layer_size as i64),
        ParamValue::Cat(cfg.activation.name().into()),
        ParamValue::Cat(cfg.solver.name().into()),
        ParamValue::Cat(cfg.learning_rate_schedule.name().into()),
        ParamValue::Int(cfg.max_iter as i64),
        ParamValue::Real(cfg.momentum),
        ParamValue::Real(cfg.validation_fraction),
        ParamValue::Real(cfg.beta1),
        ParamValue::Real(cfg.beta2),
    ])
}

/// GA over the MLP hyperparameters; fitness is `-MSE` of k-fold CV on the
/// masked targets. The default configuration is part of the initial population.
pub fn search_architecture(knowledge: &KnowledgeSet, features: &[usize], config: &ArchitectureSearchConfig, seed: u64) -> Result<ArchitectureSearch> {
    knowledge.check_trainable()?;
    if features.is_empty() {
        return Err(Error::Empty("key features"));
    }
    let space = mlp_search_space();
    let cv_seed = derive_seed(seed, "architecture-cv");
    let objective = |c: &Configuration| Ok(-regressor_cv_mse(knowledge, features, mlp_config_from(c)?, config.folds, cv_seed)?);
    let control = RunControl {
        seed: derive_seed(seed, "architecture-ga"),
        time_limit: config.time_limit_secs.map(Duration::from_secs_f64),
        stop_score: Some(config.precision),
        initial: vec![mlp_config_to(&MlpConfig::default())],
        warm_start: Vec::new(),
    };
    let result = ga_optimize(&space, &objective, &config.ga, &control)?;
    Ok(ArchitectureSearch {
        config: mlp_config_from(&result.best_configuration)?,
        cv_mse: -result.best_score,
        evaluations: result.evaluation_count,
        reached_precision: result.best_score >= config.precision,
    })
}
