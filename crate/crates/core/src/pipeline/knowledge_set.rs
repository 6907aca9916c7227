use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{load_dataset, Dataset, DatasetProfile};
use crate::error::{Error, Result};
use crate::experience::AliasMap;
use crate::knowledge::KnowledgePair;
use crate::meta_features::{extract, MetaFeatureVector};
use crate::portfolio::AlgorithmSpec;
use crate::rng::{derive_seed, rng_from_seed};

/// One-hot target over the portfolio with `-1` at algorithms that cannot
/// process the instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MaskedTarget(Vec<i8>);

impl MaskedTarget {
    /// Fails when the optimal algorithm is itself rejected.
    pub fn new(optimal: usize, rejected: &[bool]) -> Result<Self> {
        if optimal >= rejected.len() {
            return Err(Error::range("optimal index", optimal, format!("< {}", rejected.len())));
        }
        if rejected[optimal] {
            return Err(Error::Knowledge(format!("optimal algorithm #{optimal} cannot process the instance")));
        }
        Ok(MaskedTarget(
            rejected
                .iter()
                .enumerate()
                .map(|(i, &r)| if i == optimal { 1 } else if r { -1 } else { 0 })
                .collect(),
        ))
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn optimal(&self) -> usize {
        self.0.iter().position(|&v| v == 1).expect("exactly one 1")
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Portfolio positions whose capabilities reject a dataset profile.
pub fn rejected_mask(portfolio: &[AlgorithmSpec], profile: &DatasetProfile) -> Vec<bool> {
    portfolio.iter().map(|s| !s.capabilities.admits(profile)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeInstance {
    pub instance_id: String,
    pub features: MetaFeatureVector<f64>,
    pub target: MaskedTarget,
}

impl KnowledgeInstance {
    pub fn optimal(&self) -> usize {
        self.target.optimal()
    }
}

/// Knowledge pairs joined with their meta-features and masked targets.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeSet {
    pub portfolio_names: Vec<String>,
    pub instances: Vec<KnowledgeInstance>,
}

impl KnowledgeSet {
    /// Maps pair algorithms through `aliases`, drops pairs outside the
    /// portfolio or whose optimum cannot process its own dataset (with a
    /// warning), and extracts meta-features via `lookup`.
    pub fn build(
        pairs: &[KnowledgePair],
        portfolio: &[AlgorithmSpec],
        aliases: Option<&AliasMap>,
        mut lookup: impl FnMut(&str) -> Result<Dataset>,
    ) -> Result<Self> {
        let names: Vec<String> = portfolio.iter().map(|s| s.name.clone()).collect();
        let mut instances = Vec::new();
        for pair in pairs {
            let name = aliases.map_or(pair.optimal_algorithm.as_str(), |a| a.resolve(&pair.optimal_algorithm));
            let Some(optimal) = names.iter().position(|n| n == name) else {
                log::warn!("dropping `{}`: algorithm `{name}` is not in the portfolio", pair.instance_id);
                continue;
            };
            let ds = lookup(&pair.instance_id)?;
            match MaskedTarget::new(optimal, &rejected_mask(portfolio, &ds.profile())) {
                Ok(target) => instances.push(KnowledgeInstance {
                    instance_id: pair.instance_id.clone(),
                    features: extract(&ds),
                    target,
                }),
                Err(e) => log::warn!("dropping `{}`: {e}", pair.instance_id),
            }
        }
        Ok(KnowledgeSet {
            portfolio_names: names,
            instances,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.instances.iter().map(KnowledgeInstance::optimal).collect()
    }

    /// Rows of the selected meta-feature columns.
    pub fn feature_rows(&self, features: &[usize]) -> Vec<Vec<f64>> {
        self.instances.iter().map(|i| i.features.select(features)).collect()
    }

    pub fn targets(&self) -> Vec<Vec<f64>> {
        self.instances.iter().map(|i| i.target.to_f64()).collect()
    }

    /// Enough knowledge, naming at least two algorithms, to learn from.
    pub fn check_trainable(&self) -> Result<()> {
        if self.len() < MIN_KNOWLEDGE {
            return Err(Error::Knowledge(format!(
                "{} usable knowledge pairs, need at least {MIN_KNOWLEDGE}; supply more experiences",
                self.len()
            )));
        }
        let first = self.instances[0].optimal();
        if self.instances.iter().all(|i| i.optimal() == first) {
            return Err(Error::Knowledge(format!(
                "every knowledge pair names `{}`; a broader experience corpus is needed",
                self.portfolio_names[first]
            )));
        }
        Ok(())
    }
}

pub const MIN_KNOWLEDGE: usize = 10;

/// Stratified k-fold test indices. Each class is shuffled and dealt
/// round-robin; `k` drops to the smallest class size (never below 2).
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    let smallest = by_class.values().map(Vec::len).min().unwrap_or(0);
    let k = k.min(smallest).max(2).min(labels.len().max(1));
    let mut rng = rng_from_seed(derive_seed(seed, "kfold"));
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (_, mut members) in by_class {
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    folds.retain(|f| !f.is_empty());
    folds
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryEntry {
    pub data: PathBuf,
    pub schema: PathBuf,
}

/// `instance_id -> (data, schema)` paths; relative paths resolve against the registry file's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRegistry {
    pub instances: BTreeMap<String, RegistryEntry>,
    #[serde(skip)]
    base: PathBuf,
}

impl DatasetRegistry {
    pub fn new(instances: BTreeMap<String, RegistryEntry>, base: impl Into<PathBuf>) -> Self {
        DatasetRegistry {
            instances,
            base: base.into(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut reg: DatasetRegistry = serde_json::from_str(&text)?;
        reg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(reg)
    }

    pub fn load_instance(&self, instance_id: &str) -> Result<Dataset> {
        let entry = self
            .instances
            .get(instance_id)
            .ok_or_else(|| Error::Dataset(format!("instance `{instance_id}` is not in the dataset registry")))?;
        Ok(load_dataset(self.base.join(&entry.data), self.base.join(&entry.schema))?.renamed(instance_id))
    }
}
