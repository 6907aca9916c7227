use std::path::Path;

use serde::{Deserialize, Serialize};

use super::knowledge_set::KnowledgeSet;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::meta_features::{extract, feature_name, parse_feature, MetaFeatureVector};
use crate::neural_net::{MlpConfig, MlpModel, OutputMode};
use crate::portfolio::AlgorithmSpec;

/// Population mean and standard deviation of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub std: f64,
}

impl Standardization {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

pub fn fit_standardization(rows: &[Vec<f64>], d: usize) -> Vec<Standardization> {
    let n = rows.len().max(1) as f64;
    (0..d)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            Standardization { mean, std: var.sqrt() }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchSeeds {
    pub feature_selection: Option<u64>,
    pub architecture: Option<u64>,
    pub training: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub knowledge_size: usize,
    pub seeds: SearchSeeds,
    /// Cross-validated MSE achieved by the architecture search.
    pub cv_mse: Option<f64>,
    /// MSE of the trained model on the whole knowledge set.
    pub final_mse: f64,
    pub feature_selection_accuracy: Option<f64>,
    /// Zero-variance features removed before training.
    pub dropped_features: Vec<String>,
}

/// The trained recommender: meta-features in, per-algorithm suitability out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionModel {
    pub selected_features: Vec<String>,
    pub standardization: Vec<Standardization>,
    pub mlp: MlpModel<f64>,
    pub portfolio_names: Vec<String>,
    pub provenance: Provenance,
}

impl DecisionModel {
    pub fn validate(&self) -> Result<()> {
        let d = self.selected_features.len();
        if self.mlp.input_dim != d || self.standardization.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.mlp.input_dim,
            });
        }
        if self.mlp.output_dim != self.portfolio_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.portfolio_names.len(),
                got: self.mlp.output_dim,
            });
        }
        if self.standardization.iter().any(|s| !(s.std > 0.0)) {
            return Err(Error::Invariant("standardization std must be > 0".into()));
        }
        self.feature_indices().map(|_| ())
    }

    pub fn feature_indices(&self) -> Result<Vec<usize>> {
        self.selected_features.iter().map(|f| parse_feature(f)).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: DecisionModel = serde_json::from_str(&text)?;
        model.validate()?;
        Ok(model)
    }

    /// Standardized model input for a full meta-feature vector.
    pub fn inputs(&self, features: &MetaFeatureVector<f64>) -> Result<Vec<f64>> {
        let idx = self.feature_indices()?;
        Ok(idx.iter().zip(&self.standardization).map(|(&i, s)| s.apply(features[i])).collect())
    }

    /// Raw suitability scores, one per portfolio name.
    pub fn scores(&self, features: &MetaFeatureVector<f64>) -> Result<Vec<f64>> {
        self.mlp.predict(&self.inputs(features)?)
    }
}

/// Standardizes the key features, drops zero-variance ones, and trains the
/// regressor on the masked targets.
pub fn train_decision_model(knowledge: &KnowledgeSet, features: &[usize], config: MlpConfig, seed: u64) -> Result<DecisionModel> {
    knowledge.check_trainable()?;
    let rows = knowledge.feature_rows(features);
    let stats = fit_standardization(&rows, features.len());
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (j, (&f, s)) in features.iter().zip(&stats).enumerate() {
        if s.std > 1e-12 {
            kept.push((j, f, *s));
        } else {
            log::info!("dropping zero-variance feature {}", feature_name(f));
            dropped.push(feature_name(f));
        }
    }
    if kept.is_empty() {
        return Err(Error::Knowledge("every key feature is constant over the knowledge".into()));
    }
    let x: Vec<Vec<f64>> = rows.iter().map(|r| kept.iter().map(|(j, _, s)| s.apply(r[*j])).collect()).collect();
    let y = knowledge.targets();
    let mut mlp = MlpModel::<f64>::init(config, kept.len(), knowledge.portfolio_names.len(), OutputMode::Regressor, seed)?;
    mlp.train(&x, &y)?;
    let mut sq = 0.0;
    for (xi, yi) in x.iter().zip(&y) {
        sq += mlp.predict(xi)?.iter().zip(yi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    let final_mse = sq / (x.len() * knowledge.portfolio_names.len()) as f64;
    Ok(DecisionModel {
        selected_features: kept.iter().map(|(_, f, _)| feature_name(*f)).collect(),
        standardization: kept.iter().map(|(_, _, s)| *s).collect(),
        mlp,
        portfolio_names: knowledge.portfolio_names.clone(),
        provenance: Provenance {
            knowledge_size: knowledge.len(),
            seeds: SearchSeeds {
                training: seed,
                ..SearchSeeds::default()
            },
            final_mse,
            dropped_features: dropped,
            ..Provenance::default()
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendOutcome {
    pub algorithm: String,
    pub index: usize,
    /// Model outputs; `None` where the algorithm cannot process the dataset.
    pub masked_scores: Vec<Option<f64>>,
    /// The chosen name has no implementation in the portfolio.
    pub not_implemented: bool,
}

/// Argmax over admissible scores; ties go to the earliest position.
pub fn choose(scores: &[f64], admissible: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (&s, &ok)) in scores.iter().zip(admissible).enumerate() {
        if ok && best.map_or(true, |b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// Picks the algorithm for `dataset`: capability-rejected outputs are masked out
/// before the argmax. Names absent from `portfolio` are admissible and flagged.
pub fn recommend(model: &DecisionModel, dataset: &Dataset, portfolio: &[AlgorithmSpec]) -> Result<RecommendOutcome> {
    let scores = model.scores(&extract(dataset))?;
    let profile = dataset.profile();
    let admissible: Vec<bool> = model
        .portfolio_names
        .iter()
        .map(|n| portfolio.iter().find(|s| &s.name == n).map_or(true, |s| s.capabilities.admits(&profile)))
        .collect();
    let index = choose(&scores, &admissible).ok_or_else(|| Error::Capability {
        algorithm: "*".into(),
        dataset: dataset.name().to_string(),
        reason: "no algorithm in the model can process this dataset".into(),
    })?;
    let algorithm = model.portfolio_names[index].clone();
    Ok(RecommendOutcome {
        not_implemented: !portfolio.iter().any(|s| s.name == algorithm),
        masked_scores: scores.iter().zip(&admissible).map(|(&s, &ok)| ok.then_some(s)).collect(),
        algorithm,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choose_respects_mask_and_ties() {
        assert_eq!(choose(&[0.9, 0.2, 0.5], &[true, true, true]), Some(0));
        assert_eq!(choose(&[0.9, 0.2, 0.5], &[false, true, true]), Some(2));
        assert_eq!(choose(&[0.5, 0.5], &[true, true]), Some(0));
        assert_eq!(choose(&[0.5], &[false]), None);
    }

    #[test]
    fn standardization_inverts() {
        let s = Standardization { mean: 3.0, std: 2.0 };
        assert_eq!(s.invert(s.apply(7.5)), 7.5);
    }
}
