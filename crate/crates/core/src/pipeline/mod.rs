//! Offline decision-model design and online recommend-and-tune.
//!
//! Training composes knowledge acquisition, feature selection, architecture
//! search and regressor training ([`run_dmd`]). Serving recommends an
//! algorithm for a new dataset and tunes it under a time limit ([`run_udr`]).

mod dmd;
mod knowledge_set;
mod model;
mod search;
mod udr;

pub use dmd::{run_dmd, run_dmd_with, DmdConfig, DmdOutcome};
pub use knowledge_set::{
    rejected_mask, stratified_kfold, DatasetRegistry, KnowledgeInstance, KnowledgeSet, MaskedTarget, RegistryEntry, MIN_KNOWLEDGE,
};
pub use model::{choose, fit_standardization, recommend, train_decision_model, DecisionModel, Provenance, RecommendOutcome, SearchSeeds, Standardization};
pub use search::{
    classifier_cv_accuracy, mlp_config_from, mlp_config_to, mlp_search_space, regressor_cv_mse, search_architecture, select_features,
    ArchitectureSearch, ArchitectureSearchConfig, FeatureSelection, FeatureSelectionConfig,
};
pub use udr::{run_udr, run_udr_with_clock, udr_score, BackendMode, Recommendation, UdrConfig};
