//! Built-in classifier portfolio, cross-validated scoring, and portfolio-level metrics.
//!
//! Six learners with declared search spaces and capability flags:
//! `knn`, `gaussian_nb`, `categorical_nb`, `decision_tree`, `random_forest`
//! and `logistic_regression`.

mod cv;
mod encode;
mod knn;
mod logistic;
mod metrics;
mod naive_bayes;
mod tree;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetProfile};
use crate::error::{Error, Result};
use crate::hpo::{Configuration, Dimension, SearchSpace};
use crate::rng::rng_from_seed;

pub use cv::{canonical_order, cross_val_encoded, cross_val_score, stratified_folds, tune, PerformanceScore, TunedScore, TuningBudget};
pub use encode::{Encoded, FeatureKind};
pub use knn::{Distance, Knn};
pub use logistic::Logistic;
pub use metrics::{
    evaluate_portfolio, pmax_pavg, pmax_pavg_from_scores, poratio, poratio_from_scores, ratio_to_f64, MemberResult, PortfolioReport,
};
pub use naive_bayes::{CategoricalNb, GaussianNb};
pub use tree::{DecisionTree, RandomForest, TreeParams};

/// A fitted model mapping an encoded row to a class index.
pub trait Classifier: Send + Sync {
    fn predict(&self, row: &[f64]) -> usize;
}

pub type Trainer = fn(&Encoded, &Configuration, u64) -> Result<Box<dyn Classifier>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub handles_numeric: bool,
    pub handles_categorical: bool,
    pub handles_multiclass: bool,
}

impl Capabilities {
    /// `Err(reason)` when a dataset with this profile cannot be processed.
    pub fn check(&self, profile: &DatasetProfile) -> std::result::Result<(), String> {
        if profile.n_numeric > 0 && !self.handles_numeric {
            return Err(format!("{} numeric attribute(s) present", profile.n_numeric));
        }
        if profile.n_categorical > 0 && !self.handles_categorical {
            return Err(format!("{} categorical attribute(s) present", profile.n_categorical));
        }
        if profile.n_classes > 2 && !self.handles_multiclass {
            return Err(format!("{} classes present", profile.n_classes));
        }
        Ok(())
    }

    pub fn admits(&self, profile: &DatasetProfile) -> bool {
        self.check(profile).is_ok()
    }
}

#[derive(Clone)]
pub struct AlgorithmSpec {
    pub name: String,
    pub search_space: SearchSpace,
    pub capabilities: Capabilities,
    pub trainer: Trainer,
}

impl std::fmt::Debug for AlgorithmSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AlgorithmSpec")
            .field("name", &self.name)
            .field("search_space", &self.search_space)
            .field("capabilities", &self.capabilities)
            .finish()
    }
}

impl AlgorithmSpec {
    pub fn default_configuration(&self) -> Configuration {
        self.search_space.default_configuration()
    }

    pub fn check(&self, dataset: &Dataset) -> Result<()> {
        self.capabilities.check(&dataset.profile()).map_err(|reason| Error::Capability {
            algorithm: self.name.clone(),
            dataset: dataset.name().to_string(),
            reason,
        })
    }

    pub fn fit(&self, data: &Encoded, configuration: &Configuration, seed: u64) -> Result<Box<dyn Classifier>> {
        self.search_space.check(configuration)?;
        (self.trainer)(data, configuration, seed)
    }
}

fn int(c: &Configuration, i: usize) -> usize {
    c.0[i].as_int().expect("integer dimension") as usize
}

fn real(c: &Configuration, i: usize) -> f64 {
    c.0[i].as_real().expect("real dimension")
}

fn cat(c: &Configuration, i: usize) -> &str {
    c.0[i].as_str().expect("categorical dimension")
}

fn train_knn(d: &Encoded, c: &Configuration, _: u64) -> Result<Box<dyn Classifier>> {
    let distance = if cat(c, 1) == "manhattan" { Distance::Manhattan } else { Distance::Euclidean };
    Ok(Box::new(Knn::fit(d, int(c, 0), distance)))
}

fn train_gaussian_nb(d: &Encoded, c: &Configuration, _: u64) -> Result<Box<dyn Classifier>> {
    Ok(Box::new(GaussianNb::fit(d, real(c, 0))))
}

fn train_categorical_nb(d: &Encoded, c: &Configuration, _: u64) -> Result<Box<dyn Classifier>> {
    Ok(Box::new(CategoricalNb::fit(d, real(c, 0))))
}

fn train_tree(d: &Encoded, c: &Configuration, seed: u64) -> Result<Box<dyn Classifier>> {
    let params = TreeParams {
        max_depth: int(c, 0),
        min_samples_split: int(c, 1),
        max_features: None,
    };
    Ok(Box::new(DecisionTree::fit(d, &params, &mut rng_from_seed(seed))))
}

/// Features examined per split for a `feature_subsample` option.
pub fn subsample_size(option: &str, d: usize) -> usize {
    let d_f = d.max(1) as f64;
    match option {
        "sqrt" => (d_f.sqrt().floor() as usize).max(1),
        "log2" => (d_f.log2().floor() as usize).max(1),
        _ => d.max(1),
    }
}

fn train_forest(d: &Encoded, c: &Configuration, seed: u64) -> Result<Box<dyn Classifier>> {
    let params = TreeParams {
        max_depth: int(c, 1),
        min_samples_split: 2,
        max_features: Some(subsample_size(cat(c, 2), d.n_features())),
    };
    Ok(Box::new(RandomForest::fit(d, int(c, 0), &params, &mut rng_from_seed(seed))))
}

fn train_logistic(d: &Encoded, c: &Configuration, _: u64) -> Result<Box<dyn Classifier>> {
    Ok(Box::new(Logistic::fit(d, real(c, 0), int(c, 1))))
}

fn space(dims: Vec<Dimension>) -> SearchSpace {
    SearchSpace::new(dims).expect("built-in space is valid")
}

/// The six built-in algorithms, in portfolio order.
pub fn builtin_portfolio() -> Vec<AlgorithmSpec> {
    let numeric_only = Capabilities {
        handles_numeric: true,
        handles_categorical: false,
        handles_multiclass: true,
    };
    let both = Capabilities {
        handles_numeric: true,
        handles_categorical: true,
        handles_multiclass: true,
    };
    vec![
        AlgorithmSpec {
            name: "knn".into(),
            search_space: space(vec![
                Dimension::integer("k", 1, 25),
                Dimension::categorical("distance", ["euclidean", "manhattan"]),
            ]),
            capabilities: numeric_only,
            trainer: train_knn,
        },
        AlgorithmSpec {
            name: "gaussian_nb".into(),
            search_space: space(vec![Dimension::log_real("var_smoothing", 1e-12, 1e-3)]),
            capabilities: numeric_only,
            trainer: train_gaussian_nb,
        },
        AlgorithmSpec {
            name: "categorical_nb".into(),
            search_space: space(vec![Dimension::real("alpha", 0.01, 10.0)]),
            capabilities: Capabilities {
                handles_numeric: false,
                handles_categorical: true,
                handles_multiclass: true,
            },
            trainer: train_categorical_nb,
        },
        AlgorithmSpec {
            name: "decision_tree".into(),
            search_space: space(vec![
                Dimension::integer("max_depth", 1, 30),
                Dimension::integer("min_samples_split", 2, 20),
            ]),
            capabilities: both,
            trainer: train_tree,
        },
        AlgorithmSpec {
            name: "random_forest".into(),
            search_space: space(vec![
                Dimension::integer("n_trees", 10, 200),
                Dimension::integer("max_depth", 1, 30),
                Dimension::categorical("feature_subsample", ["sqrt", "log2", "all"]),
            ]),
            capabilities: both,
            trainer: train_forest,
        },
        AlgorithmSpec {
            name: "logistic_regression".into(),
            search_space: space(vec![
                Dimension::log_real("l2", 1e-4, 1e2),
                Dimension::integer("iterations", 50, 500),
            ]),
            capabilities: numeric_only,
            trainer: train_logistic,
        },
    ]
}

/// Looks up a spec by name.
pub fn find<'p>(portfolio: &'p [AlgorithmSpec], name: &str) -> Result<&'p AlgorithmSpec> {
    portfolio
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))
}

/// Fits on the whole dataset and predicts class labels for another dataset's rows.
pub fn fit_predict(spec: &AlgorithmSpec, train: &Dataset, configuration: &Configuration, seed: u64, rows: &Encoded) -> Result<Vec<usize>> {
    spec.check(train)?;
    let model = spec.fit(&Encoded::from_dataset(train), configuration, seed)?;
    Ok(rows.rows.iter().map(|r| model.predict(r)).collect())
}
