use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::model::{recommend, DecisionModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hpo::{
    bo_optimize_with_clock, ga_optimize_with_clock, select_backend, Backend, BoParams, Clock, Configuration, GaParams, RunControl,
    StopReason, WallClock,
};
use crate::portfolio::{cross_val_encoded, find, AlgorithmSpec, Encoded};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    /// Decide from the cost of one probe evaluation.
    Auto,
    Ga,
    Bo,
}

/// Recommend-and-tune settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UdrConfig {
    pub time_limit_secs: f64,
    pub folds: usize,
    /// Probe cost at or above which BO is used.
    pub threshold_secs: f64,
    pub backend: BackendMode,
    pub ga: GaParams,
    pub bo: BoParams,
}

impl Default for UdrConfig {
    fn default() -> Self {
        UdrConfig {
            time_limit_secs: 60.0,
            folds: 10,
            threshold_secs: 600.0,
            backend: BackendMode::Auto,
            ga: GaParams::default(),
            bo: BoParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub algorithm: String,
    pub tuned_configuration: Option<serde_json::Value>,
    /// k-fold accuracy of `tuned_configuration`.
    pub tuned_score: Option<f64>,
    /// k-fold accuracy of the default configuration on the same folds.
    pub default_score: Option<f64>,
    pub backend_used: Option<Backend>,
    pub masked_scores: Vec<Option<f64>>,
    pub not_implemented: bool,
    /// Tuning stopped because the time limit ran out.
    pub budget_exhausted: bool,
    pub evaluations: usize,
}

/// Recommends an algorithm and tunes it within the time limit, using the wall clock.
pub fn run_udr(model: &DecisionModel, dataset: &Dataset, portfolio: &[AlgorithmSpec], config: &UdrConfig, seed: u64) -> Result<Recommendation> {
    run_udr_with_clock(model, dataset, portfolio, config, seed, &WallClock::new())
}

/// Seeded k-fold accuracy used by [`run_udr`] as its tuning objective.
pub fn udr_score(spec: &AlgorithmSpec, dataset: &Dataset, configuration: &Configuration, folds: usize, seed: u64) -> Result<f64> {
    spec.check(dataset)?;
    cross_val_encoded(spec, &Encoded::from_dataset(dataset), configuration, folds, derive_seed(seed, "udr-cv")).map(|r| r.0)
}

pub fn run_udr_with_clock(
    model: &DecisionModel,
    dataset: &Dataset,
    portfolio: &[AlgorithmSpec],
    config: &UdrConfig,
    seed: u64,
    clock: &dyn Clock,
) -> Result<Recommendation> {
    if !(config.time_limit_secs >= 0.0 && config.time_limit_secs.is_finite()) {
        return Err(Error::range("time_limit_secs", config.time_limit_secs, ">= 0"));
    }
    let picked = recommend(model, dataset, portfolio)?;
    let mut out = Recommendation {
        algorithm: picked.algorithm.clone(),
        tuned_configuration: None,
        tuned_score: None,
        default_score: None,
        backend_used: None,
        masked_scores: picked.masked_scores,
        not_implemented: picked.not_implemented,
        budget_exhausted: false,
        evaluations: 0,
    };
    if picked.not_implemented {
        log::warn!("`{}` is recommended but not implemented; implement it to tune it", picked.algorithm);
        return Ok(out);
    }
    let spec = find(portfolio, &picked.algorithm)?;
    spec.check(dataset)?;
    let data = Encoded::from_dataset(dataset);
    let cv_seed = derive_seed(seed, "udr-cv");
    let objective = |c: &Configuration| cross_val_encoded(spec, &data, c, config.folds, cv_seed).map(|r| r.0);
    let default = spec.default_configuration();

    let start = clock.now();
    let choice = select_backend(&objective, &default, Duration::from_secs_f64(config.threshold_secs), clock);
    let backend = match config.backend {
        BackendMode::Auto => choice.backend,
        BackendMode::Ga => Backend::Ga,
        BackendMode::Bo => Backend::Bo,
    };
    out.backend_used = Some(backend);
    out.default_score = choice.probe_score;
    out.evaluations = 1;
    let limit = Duration::from_secs_f64(config.time_limit_secs);
    let spent = clock.now().saturating_sub(start);
    if spent >= limit {
        out.budget_exhausted = true;
        if let Some(s) = choice.probe_score {
            out.tuned_configuration = Some(spec.search_space.to_json(&default));
            out.tuned_score = Some(s);
        }
        return Ok(out);
    }

    let control = RunControl {
        seed: derive_seed(seed, "udr-search"),
        time_limit: Some(limit - spent),
        stop_score: Some(1.0),
        initial: if choice.probe_score.is_none() { vec![default.clone()] } else { Vec::new() },
        warm_start: choice.probe_score.map(|s| vec![(default.clone(), s)]).unwrap_or_default(),
    };
    let result = match backend {
        Backend::Ga => ga_optimize_with_clock(&spec.search_space, &objective, &config.ga, &control, clock),
        Backend::Bo => bo_optimize_with_clock(&spec.search_space, &objective, &config.bo, &control, clock),
    }?;
    out.tuned_configuration = Some(spec.search_space.to_json(&result.best_configuration));
    out.tuned_score = Some(result.best_score);
    out.budget_exhausted = result.stop_reason == StopReason::TimeLimit;
    out.evaluations += result.evaluation_count;
    Ok(out)
}
