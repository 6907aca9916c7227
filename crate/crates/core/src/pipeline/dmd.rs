use std::path::Path;

use serde::{Deserialize, Serialize};

use super::knowledge_set::{DatasetRegistry, KnowledgeSet};
use super::model::{train_decision_model, DecisionModel};
use super::search::{search_architecture, select_features, ArchitectureSearch, ArchitectureSearchConfig, FeatureSelection, FeatureSelectionConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::experience::{load_experiences, AliasMap, ExperienceStore};
use crate::knowledge::{acquire_knowledge, KnowledgePair, DEFAULT_MIN_ALGORITHMS};
use crate::portfolio::AlgorithmSpec;
use crate::rng::derive_seed;

/// Offline training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DmdConfig {
    /// Instances naming this many distinct algorithms or fewer are skipped.
    pub min_algorithms: usize,
    pub features: FeatureSelectionConfig,
    pub architecture: ArchitectureSearchConfig,
}

impl Default for DmdConfig {
    fn default() -> Self {
        DmdConfig {
            min_algorithms: DEFAULT_MIN_ALGORITHMS,
            features: FeatureSelectionConfig::default(),
            architecture: ArchitectureSearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmdOutcome {
    pub model: DecisionModel,
    pub knowledge: Vec<KnowledgePair>,
    pub feature_selection: FeatureSelection,
    pub architecture: ArchitectureSearch,
}

/// Trains a decision model from files: experiences, dataset registry and an optional alias map.
pub fn run_dmd(
    experiences: impl AsRef<Path>,
    registry: impl AsRef<Path>,
    aliases: Option<&Path>,
    portfolio: &[AlgorithmSpec],
    config: &DmdConfig,
    seed: u64,
) -> Result<DmdOutcome> {
    let store = load_experiences(experiences).map_err(|e| e.in_stage("acquire_knowledge"))?;
    let aliases = aliases
        .map(AliasMap::load)
        .transpose()
        .map_err(|e| e.in_stage("acquire_knowledge"))?;
    let registry = DatasetRegistry::load(registry).map_err(|e| e.in_stage("load_datasets"))?;
    run_dmd_with(&store, aliases.as_ref(), portfolio, |id| registry.load_instance(id), config, seed)
}

/// Knowledge acquisition, feature selection, architecture search and training, in that order.
pub fn run_dmd_with(
    store: &ExperienceStore,
    aliases: Option<&AliasMap>,
    portfolio: &[AlgorithmSpec],
    lookup: impl FnMut(&str) -> Result<Dataset>,
    config: &DmdConfig,
    seed: u64,
) -> Result<DmdOutcome> {
    let stage = |name: &'static str| move |e: Error| e.in_stage(name);

    if store.is_empty() {
        return Err(Error::Empty("experience file").in_stage("acquire_knowledge"));
    }
    let pairs = acquire_knowledge(store, config.min_algorithms).map_err(stage("acquire_knowledge"))?;
    if pairs.is_empty() {
        return Err(Error::Knowledge("no instance has enough evidence".into()).in_stage("acquire_knowledge"));
    }
    let pairs: Vec<KnowledgePair> = pairs
        .into_iter()
        .map(|mut p| {
            if let Some(a) = aliases {
                p.optimal_algorithm = a.resolve(&p.optimal_algorithm).to_string();
            }
            p
        })
        .collect();
    log::info!("acquired {} knowledge pairs", pairs.len());

    let knowledge = KnowledgeSet::build(&pairs, portfolio, None, lookup).map_err(stage("load_datasets"))?;

    let fs_seed = derive_seed(seed, "select_features");
    let feature_selection = select_features(&knowledge, &config.features, fs_seed).map_err(stage("select_features"))?;
    log::info!("key features: {}", feature_selection.names().join(","));

    let arch_seed = derive_seed(seed, "search_architecture");
    let architecture =
        search_architecture(&knowledge, &feature_selection.features, &config.architecture, arch_seed).map_err(stage("search_architecture"))?;
    log::info!("architecture cv mse {:.6}", architecture.cv_mse);

    let train_seed = derive_seed(seed, "train_decision_model");
    let mut model = train_decision_model(&knowledge, &feature_selection.features, architecture.config, train_seed)
        .map_err(stage("train_decision_model"))?;
    model.provenance.seeds.feature_selection = Some(fs_seed);
    model.provenance.seeds.architecture = Some(arch_seed);
    model.provenance.cv_mse = Some(architecture.cv_mse);
    model.provenance.feature_selection_accuracy = Some(feature_selection.cv_accuracy);

    Ok(DmdOutcome {
        model,
        knowledge: pairs,
        feature_selection,
        architecture,
    })
}
