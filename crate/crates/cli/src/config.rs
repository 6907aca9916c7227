//! Run configuration: built-in defaults, optionally overlaid by a TOML file,
//! then by command-line flags.

use std::path::{Path, PathBuf};

use cash_forge::hpo::{BoParams, GaParams};
use cash_forge::pipeline::{BackendMode, DmdConfig, UdrConfig};
use cash_forge::portfolio::TuningBudget;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_ENV: &str = "CASH_FORGE_CONFIG";

/// Time budgets in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// `tune` time limit, and per-member tuning limit in `evaluate`.
    pub tune_secs: f64,
    /// `recommend --tune` time limit.
    pub udr_secs: f64,
    /// `train` limit for each of feature selection and architecture search; unlimited when absent.
    pub train_stage_secs: Option<f64>,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            tune_secs: 1000.0,
            udr_secs: 60.0,
            train_stage_secs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub cv_folds: usize,
    /// Probe cost in seconds at or above which BO replaces GA.
    pub threshold_secs: f64,
    pub backend: BackendMode,
    pub ga: GaParams,
    pub bo: BoParams,
    pub budgets: Budgets,
    /// Offline training: knowledge filter, feature selection (with its MLP) and architecture search.
    pub train: DmdConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            cv_folds: 10,
            threshold_secs: 600.0,
            backend: BackendMode::Auto,
            ga: GaParams::default(),
            bo: BoParams::default(),
            budgets: Budgets::default(),
            train: DmdConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("config: {name} must be a positive number, got {v}")))
    }
}

impl RunConfig {
    /// Defaults overlaid by `path`, or by the file named in the environment when `path` is absent.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let path: Option<PathBuf> = path.map(Path::to_path_buf).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let core = |e: cash_forge::Error| CliError::Input(format!("config: {e}"));
        if self.cv_folds < 2 {
            return Err(CliError::Input(format!("config: cv_folds must be at least 2, got {}", self.cv_folds)));
        }
        positive("threshold_secs", self.threshold_secs)?;
        positive("budgets.tune_secs", self.budgets.tune_secs)?;
        positive("budgets.udr_secs", self.budgets.udr_secs)?;
        if let Some(s) = self.budgets.train_stage_secs {
            positive("budgets.train_stage_secs", s)?;
        }
        self.ga.validate().map_err(core)?;
        self.bo.validate().map_err(core)?;
        self.train.features.ga.validate().map_err(core)?;
        self.train.features.mlp.validate().map_err(core)?;
        self.train.architecture.ga.validate().map_err(core)?;
        if self.train.min_algorithms == 0 {
            return Err(CliError::Input("config: train.min_algorithms must be at least 1".into()));
        }
        Ok(())
    }

    pub fn udr(&self) -> UdrConfig {
        UdrConfig {
            time_limit_secs: self.budgets.udr_secs,
            folds: self.cv_folds,
            threshold_secs: self.threshold_secs,
            backend: self.backend,
            ga: self.ga.clone(),
            bo: self.bo.clone(),
        }
    }

    pub fn tuning_budget(&self, time_limit_secs: f64) -> TuningBudget {
        TuningBudget {
            ga: self.ga.clone(),
            time_limit_secs: Some(time_limit_secs),
            folds: self.cv_folds,
        }
    }

    pub fn dmd(&self) -> DmdConfig {
        let mut cfg = self.train.clone();
        if let Some(s) = self.budgets.train_stage_secs {
            cfg.features.time_limit_secs = Some(s);
            cfg.architecture.time_limit_secs = Some(s);
        }
        cfg
    }
}
