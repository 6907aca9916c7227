use std::cmp::Ordering;
use std::time::Duration;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encode::Encoded;
use super::AlgorithmSpec;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hpo::{ga_optimize, Configuration, GaParams, RunControl};
use crate::rng::{derive_indexed, derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceScore {
    pub algorithm: String,
    pub dataset: String,
    pub accuracy: f64,
    pub configuration: serde_json::Value,
}

/// Row order by (class, values), so fold assignment ignores input order.
pub fn canonical_order(data: &Encoded) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..data.n_rows()).collect();
    idx.sort_by(|&a, &b| {
        data.labels[a].cmp(&data.labels[b]).then_with(|| {
            data.rows[a]
                .iter()
                .zip(&data.rows[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    idx
}

/// Test-row indices of `k` stratified folds. Each class is shuffled and dealt
/// round-robin, continuing where the previous class stopped. `k` drops to the
/// smallest class size when that is lower, but never below 2.
pub fn stratified_folds(data: &Encoded, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::range("folds", k, ">= 2"));
    }
    let smallest = data.class_counts().into_iter().filter(|&c| c > 0).min().unwrap_or(0);
    let k = k.min(smallest).max(2);
    if data.n_rows() < k {
        return Err(Error::Dataset(format!("{} rows cannot form {k} folds", data.n_rows())));
    }
    let mut rng = rng_from_seed(derive_seed(seed, "cv-split"));
    let order = canonical_order(data);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in 0..data.n_classes {
        let mut members: Vec<usize> = order.iter().copied().filter(|&i| data.labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    Ok(folds)
}

/// Mean fold accuracy and the per-fold accuracies.
pub fn cross_val_encoded(spec: &AlgorithmSpec, data: &Encoded, configuration: &Configuration, k: usize, seed: u64) -> Result<(f64, Vec<f64>)> {
    spec.search_space.check(configuration)?;
    let folds = stratified_folds(data, k, seed)?;
    let mut in_test = vec![usize::MAX; data.n_rows()];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            in_test[i] = f;
        }
    }
    let order = canonical_order(data);
    let accs: Vec<f64> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train_idx: Vec<usize> = order.iter().copied().filter(|&i| in_test[i] != f).collect();
            let model = spec.fit(&data.subset(&train_idx), configuration, derive_indexed(seed, "cv-fold", f as u64))?;
            let hits = test.iter().filter(|&&i| model.predict(&data.rows[i]) == data.labels[i]).count();
            Ok(hits as f64 / test.len() as f64)
        })
        .collect::<Result<_>>()?;
    Ok((accs.iter().sum::<f64>() / accs.len() as f64, accs))
}

/// Seeded stratified k-fold accuracy of one configuration.
pub fn cross_val_score(spec: &AlgorithmSpec, dataset: &Dataset, configuration: &Configuration, k: usize, seed: u64) -> Result<PerformanceScore> {
    spec.check(dataset)?;
    let (accuracy, _) = cross_val_encoded(spec, &Encoded::from_dataset(dataset), configuration, k, seed)?;
    Ok(PerformanceScore {
        algorithm: spec.name.clone(),
        dataset: dataset.name().to_string(),
        accuracy,
        configuration: spec.search_space.to_json(configuration),
    })
}

/// Budget for tuning one algorithm on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningBudget {
    pub ga: GaParams,
    pub time_limit_secs: Option<f64>,
    pub folds: usize,
}

impl Default for TuningBudget {
    fn default() -> Self {
        TuningBudget {
            ga: GaParams::default(),
            time_limit_secs: Some(1000.0),
            folds: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedScore {
    pub score: PerformanceScore,
    pub default_accuracy: f64,
    pub evaluations: usize,
}

/// GA-tunes `spec` on `dataset` by k-fold accuracy on fixed folds. The
/// default configuration is evaluated first, so the result never scores below it.
pub fn tune(spec: &AlgorithmSpec, dataset: &Dataset, budget: &TuningBudget, seed: u64) -> Result<TunedScore> {
    spec.check(dataset)?;
    let data = Encoded::from_dataset(dataset);
    let cv_seed = derive_seed(seed, "tune-cv");
    let objective = |c: &Configuration| cross_val_encoded(spec, &data, c, budget.folds, cv_seed).map(|r| r.0);
    let default = spec.default_configuration();
    let control = RunControl {
        seed: derive_seed(seed, "tune-ga"),
        time_limit: budget.time_limit_secs.map(Duration::from_secs_f64),
        stop_score: Some(1.0),
        initial: vec![default.clone()],
        warm_start: Vec::new(),
    };
    let result = ga_optimize(&spec.search_space, &objective, &budget.ga, &control)?;
    let default_accuracy = result
        .history
        .iter()
        .find(|e| e.configuration == default)
        .map(|e| e.score)
        .unwrap_or(f64::NEG_INFINITY);
    Ok(TunedScore {
        score: PerformanceScore {
            algorithm: spec.name.clone(),
            dataset: dataset.name().to_string(),
            accuracy: result.best_score,
            configuration: spec.search_space.to_json(&result.best_configuration),
        },
        default_accuracy,
        evaluations: result.evaluation_count,
    })
}
