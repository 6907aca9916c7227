use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::cv::{tune, TuningBudget};
use super::{find, AlgorithmSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Fraction of portfolio members whose performance does not exceed
/// `algorithm`'s. `None` marks a member that cannot process the dataset; it
/// stays in the denominator with performance 0.
pub fn poratio_from_scores(algorithm: &str, scores: &[(String, Option<f64>)]) -> Result<Ratio<usize>> {
    let own = scores
        .iter()
        .find(|(n, _)| n == algorithm)
        .ok_or_else(|| Error::UnknownAlgorithm(algorithm.to_string()))?
        .1
        .unwrap_or(0.0);
    let not_better = scores.iter().filter(|(_, p)| p.unwrap_or(0.0) <= own).count();
    Ok(Ratio::new(not_better, scores.len()))
}

/// (max, mean) performance over the members that can process the dataset.
pub fn pmax_pavg_from_scores(scores: &[(String, Option<f64>)]) -> Result<(f64, f64)> {
    let applicable: Vec<f64> = scores.iter().filter_map(|(_, p)| *p).collect();
    if applicable.is_empty() {
        return Err(Error::Empty("applicable portfolio members"));
    }
    let max = applicable.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let avg = applicable.iter().sum::<f64>() / applicable.len() as f64;
    Ok((max, avg))
}

pub fn ratio_to_f64(r: Ratio<usize>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberResult {
    pub algorithm: String,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Tuned k-fold accuracy.
    pub accuracy: Option<f64>,
    pub default_accuracy: Option<f64>,
    pub configuration: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioReport {
    pub dataset: String,
    pub members: Vec<MemberResult>,
    pub pmax: f64,
    pub pavg: f64,
    /// Exact ratios as `"n/d"` strings.
    pub poratio: BTreeMap<String, String>,
}

impl PortfolioReport {
    pub fn scores(&self) -> Vec<(String, Option<f64>)> {
        self.members.iter().map(|m| (m.algorithm.clone(), m.accuracy)).collect()
    }
}

fn tuned_scores(dataset: &Dataset, portfolio: &[AlgorithmSpec], budget: &TuningBudget, seed: u64) -> Result<Vec<MemberResult>> {
    portfolio
        .iter()
        .map(|spec| match spec.capabilities.check(&dataset.profile()) {
            Err(reason) => Ok(MemberResult {
                algorithm: spec.name.clone(),
                applicable: false,
                reason: Some(reason),
                accuracy: None,
                default_accuracy: None,
                configuration: None,
            }),
            Ok(()) => {
                let t = tune(spec, dataset, budget, derive_seed(seed, &spec.name))?;
                Ok(MemberResult {
                    algorithm: spec.name.clone(),
                    applicable: true,
                    reason: None,
                    accuracy: Some(t.score.accuracy),
                    default_accuracy: Some(t.default_accuracy),
                    configuration: Some(t.score.configuration),
                })
            }
        })
        .collect()
}

/// Tunes every applicable member and reports P, Pmax, Pavg and every PORatio.
pub fn evaluate_portfolio(dataset: &Dataset, portfolio: &[AlgorithmSpec], budget: &TuningBudget, seed: u64) -> Result<PortfolioReport> {
    let members = tuned_scores(dataset, portfolio, budget, seed)?;
    let scores: Vec<(String, Option<f64>)> = members.iter().map(|m| (m.algorithm.clone(), m.accuracy)).collect();
    let (pmax, pavg) = pmax_pavg_from_scores(&scores)?;
    let poratio = scores
        .iter()
        .map(|(n, _)| Ok((n.clone(), poratio_from_scores(n, &scores)?.to_string())))
        .collect::<Result<_>>()?;
    Ok(PortfolioReport {
        dataset: dataset.name().to_string(),
        members,
        pmax,
        pavg,
        poratio,
    })
}

/// PORatio of `algorithm` from tuned performances of the whole portfolio.
pub fn poratio(algorithm: &str, dataset: &Dataset, portfolio: &[AlgorithmSpec], budget: &TuningBudget, seed: u64) -> Result<Ratio<usize>> {
    find(portfolio, algorithm)?;
    let members = tuned_scores(dataset, portfolio, budget, seed)?;
    let scores: Vec<_> = members.into_iter().map(|m| (m.algorithm, m.accuracy)).collect();
    poratio_from_scores(algorithm, &scores)
}

/// Pmax and Pavg from tuned performances of the applicable members.
pub fn pmax_pavg(dataset: &Dataset, portfolio: &[AlgorithmSpec], budget: &TuningBudget, seed: u64) -> Result<(f64, f64)> {
    let members = tuned_scores(dataset, portfolio, budget, seed)?;
    let scores: Vec<_> = members.into_iter().map(|m| (m.algorithm, m.accuracy)).collect();
    pmax_pavg_from_scores(&scores)
}
