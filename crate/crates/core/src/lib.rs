//! Algorithm selection and hyperparameter tuning driven by published experience.
//!
//! Experiences mined from papers are distilled into knowledge pairs
//! ([`knowledge`]), joined with dataset meta-features ([`meta_features`]) and
//! used to train an MLP decision model ([`neural_net`], [`pipeline`]). For a
//! new dataset the model recommends one member of the classifier
//! [`portfolio`], which is then tuned by GA or BO ([`hpo`]).
//!
//! The numeric core is generic over [`scalar::Scalar`]; the aliases below fix
//! it to `f64`, which is what the pipeline uses.

pub mod dataset;
pub mod error;
pub mod experience;
pub mod hpo;
pub mod knowledge;
pub mod meta_features;
pub mod neural_net;
pub mod pipeline;
pub mod portfolio;
pub mod rng;
pub mod scalar;
pub mod synthetic;

pub use dataset::{load_dataset, Dataset};
pub use error::{Error, Result};
pub use experience::{load_experiences, AliasMap, ExperienceStore};
pub use knowledge::{acquire_knowledge, KnowledgePair};
pub use pipeline::{recommend, run_dmd, run_udr, DecisionModel, Recommendation};
pub use portfolio::builtin_portfolio;

/// `f64` MLP.
pub type Mlp = neural_net::MlpModel<f64>;
/// `f64` meta-feature vector.
pub type MetaFeatures = meta_features::MetaFeatureVector<f64>;
/// `f64` Gaussian-process surrogate.
pub type GaussianProcess = hpo::GaussianProcess<f64>;
/// Exact PORatio.
pub type PoRatio = num_rational::Ratio<usize>;
