//! Hyperparameter optimization over mixed search spaces.
//!
//! Objectives are maximized. Two backends share one bookkeeping layer: a
//! genetic algorithm ([`ga_optimize`]) and Gaussian-process Bayesian
//! optimization ([`bo_optimize`]). [`select_backend`] picks between them from
//! the cost of a single probe evaluation. Failed evaluations score `-inf`.

mod bo;
mod ga;
pub mod gp;
mod random;
mod selector;
mod space;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bo::{bo_optimize, bo_optimize_with_clock, BoParams};
pub use ga::{ga_optimize, ga_optimize_with_clock, GaParams};
pub use gp::{expected_improvement, normal_cdf, GaussianProcess};
pub use random::random_search;
pub use selector::{select_backend, Backend, BackendChoice, DEFAULT_THRESHOLD};
pub use space::{Configuration, Dimension, DimensionKind, ParamValue, SearchSpace};

/// A function to maximize. Must be deterministic for a fixed configuration.
pub trait Objective: Sync {
    fn evaluate(&self, configuration: &Configuration) -> Result<f64>;
}

impl<F> Objective for F
where
    F: Fn(&Configuration) -> Result<f64> + Sync,
{
    fn evaluate(&self, configuration: &Configuration) -> Result<f64> {
        self(configuration)
    }
}

/// Monotone time source; elapsed time is measured between two readings.
pub trait Clock: Sync {
    fn now(&self) -> Duration;
}

#[derive(Debug, Clone, Copy)]
pub struct WallClock {
    origin: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock { origin: Instant::now() }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Default)]
pub struct SimulatedClock {
    nanos: AtomicU64,
}

impl SimulatedClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, by: Duration) {
        self.nanos.fetch_add(by.as_nanos() as u64, Ordering::SeqCst);
    }
}

impl Clock for SimulatedClock {
    fn now(&self) -> Duration {
        Duration::from_nanos(self.nanos.load(Ordering::SeqCst))
    }
}

/// Per-run controls shared by every backend.
#[derive(Debug, Clone, Default)]
pub struct RunControl {
    pub seed: u64,
    pub time_limit: Option<Duration>,
    /// Stop as soon as a score reaches this value.
    pub stop_score: Option<f64>,
    /// Configurations evaluated first, before any sampled point.
    pub initial: Vec<Configuration>,
    /// Already-scored configurations entered into the history without evaluation.
    pub warm_start: Vec<(Configuration, f64)>,
}

impl RunControl {
    pub fn seeded(seed: u64) -> Self {
        RunControl {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub configuration: Configuration,
    pub score: f64,
    /// Milliseconds since the run started when the evaluation finished.
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Generation cap or evaluation budget reached.
    Budget,
    StopScore,
    TimeLimit,
    /// Every candidate point had already been evaluated.
    Exhausted,
}

/// Expected-improvement summary of one BO acquisition step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionStep {
    pub min_ei: f64,
    pub max_ei: f64,
    pub length_scale: f64,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_configuration: Configuration,
    pub best_score: f64,
    /// Number of objective calls; warm-start entries and cache hits are not counted.
    pub evaluation_count: usize,
    pub history: Vec<Evaluation>,
    pub stop_reason: StopReason,
    pub acquisition: Vec<AcquisitionStep>,
}

impl OptimizationResult {
    /// Index of the first history entry scoring at least `target`.
    pub fn first_reaching(&self, target: f64) -> Option<usize> {
        self.history.iter().position(|e| e.score >= target)
    }
}

/// Shared evaluation bookkeeping: history, duplicate cache, budgets.
pub(crate) struct Tracker<'a> {
    space: &'a SearchSpace,
    objective: &'a dyn Objective,
    clock: &'a dyn Clock,
    start: Duration,
    time_limit: Option<Duration>,
    stop_score: Option<f64>,
    history: Vec<Evaluation>,
    cache: HashMap<String, f64>,
    calls: usize,
    stop: Option<StopReason>,
}

impl<'a> Tracker<'a> {
    pub(crate) fn new(
        space: &'a SearchSpace,
        objective: &'a dyn Objective,
        clock: &'a dyn Clock,
        control: &RunControl,
    ) -> Result<Self> {
        space.validate()?;
        let mut t = Tracker {
            space,
            objective,
            clock,
            start: clock.now(),
            time_limit: control.time_limit,
            stop_score: control.stop_score,
            history: Vec::new(),
            cache: HashMap::new(),
            calls: 0,
            stop: None,
        };
        for (c, score) in &control.warm_start {
            space.check(c)?;
            t.record(c.clone(), *score);
        }
        for c in &control.initial {
            space.check(c)?;
        }
        Ok(t)
    }

    fn elapsed(&self) -> Duration {
        self.clock.now().saturating_sub(self.start)
    }

    fn record(&mut self, configuration: Configuration, score: f64) {
        let score = if score.is_nan() { f64::NEG_INFINITY } else { score };
        self.cache.insert(configuration.key(), score);
        self.history.push(Evaluation {
            configuration,
            score,
            elapsed_ms: self.elapsed().as_millis() as u64,
        });
        if let Some(target) = self.stop_score {
            if score >= target {
                self.stop = Some(StopReason::StopScore);
            }
        }
    }

    pub(crate) fn stopped(&self) -> Option<StopReason> {
        self.stop
    }

    pub(crate) fn is_known(&self, c: &Configuration) -> bool {
        self.cache.contains_key(&c.key())
    }

    /// Scores `c`, reusing earlier results for repeated configurations.
    /// Returns `None` once the run has stopped.
    pub(crate) fn evaluate(&mut self, c: &Configuration) -> Option<f64> {
        if self.stop.is_some() {
            return None;
        }
        if let Some(&s) = self.cache.get(&c.key()) {
            return Some(s);
        }
        if let Some(limit) = self.time_limit {
            if self.elapsed() >= limit {
                self.stop = Some(StopReason::TimeLimit);
                return None;
            }
        }
        debug_assert!(self.space.contains(c));
        self.calls += 1;
        let score = match self.objective.evaluate(c) {
            Ok(s) if !s.is_nan() => s,
            Ok(_) => {
                log::debug!("objective returned NaN for {}", self.space.describe(c));
                f64::NEG_INFINITY
            }
            Err(e) => {
                log::debug!("objective failed for {}: {e}", self.space.describe(c));
                f64::NEG_INFINITY
            }
        };
        self.record(c.clone(), score);
        Some(score)
    }

    pub(crate) fn history(&self) -> &[Evaluation] {
        &self.history
    }

    pub(crate) fn finish(self, default_reason: StopReason, acquisition: Vec<AcquisitionStep>) -> Result<OptimizationResult> {
        let stop_reason = self.stop.unwrap_or(default_reason);
        let mut best: Option<&Evaluation> = None;
        for e in &self.history {
            if best.map_or(true, |b| e.score > b.score) {
                best = Some(e);
            }
        }
        let best = match best {
            Some(b) => b.clone(),
            None if stop_reason == StopReason::TimeLimit => return Err(Error::BudgetExhausted),
            None => return Err(Error::Empty("optimization history")),
        };
        if best.score == f64::NEG_INFINITY {
            return Err(Error::AllFailed(0));
        }
        Ok(OptimizationResult {
            best_configuration: best.configuration,
            best_score: best.score,
            evaluation_count: self.calls,
            history: self.history,
            stop_reason,
            acquisition,
        })
    }
}
