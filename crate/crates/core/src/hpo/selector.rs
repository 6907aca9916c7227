use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Clock, Configuration, Objective};

/// Probe cost below which the GA backend is chosen.
pub const DEFAULT_THRESHOLD: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Ga,
    Bo,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Ga => "ga",
            Backend::Bo => "bo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendChoice {
    pub backend: Backend,
    pub probe_seconds: f64,
    /// Score of the probe configuration; `None` when the probe failed.
    pub probe_score: Option<f64>,
}

/// Times one evaluation of `probe`: cheaper than `threshold` picks GA,
/// otherwise (or if the probe fails) BO.
pub fn select_backend(objective: &dyn Objective, probe: &Configuration, threshold: Duration, clock: &dyn Clock) -> BackendChoice {
    let start = clock.now();
    let outcome = objective.evaluate(probe);
    let elapsed = clock.now().saturating_sub(start);
    let probe_score = match outcome {
        Ok(s) if !s.is_nan() => Some(s),
        Ok(_) => None,
        Err(e) => {
            log::warn!("backend probe failed ({e}); assuming an expensive objective");
            None
        }
    };
    let backend = if probe_score.is_some() && elapsed < threshold { Backend::Ga } else { Backend::Bo };
    BackendChoice {
        backend,
        probe_seconds: elapsed.as_secs_f64(),
        probe_score,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::{Error, Result};
    use crate::hpo::SimulatedClock;

    fn timed(clock: &SimulatedClock, secs: u64) -> impl Fn(&Configuration) -> Result<f64> + Sync + '_ {
        move |_| {
            clock.advance(Duration::from_secs(secs));
            Ok(0.5)
        }
    }

    #[test]
    fn cheap_probe_selects_ga() {
        let clock = SimulatedClock::new();
        let c = select_backend(&timed(&clock, 1), &Configuration(vec![]), DEFAULT_THRESHOLD, &clock);
        assert_eq!(c.backend, Backend::Ga);
        assert_eq!(c.probe_score, Some(0.5));
    }

    #[test]
    fn expensive_probe_selects_bo() {
        let clock = SimulatedClock::new();
        let c = select_backend(&timed(&clock, 900), &Configuration(vec![]), DEFAULT_THRESHOLD, &clock);
        assert_eq!(c.backend, Backend::Bo);
        assert_eq!(c.probe_seconds, 900.0);
    }

    #[test]
    fn failing_probe_selects_bo() {
        let clock = SimulatedClock::new();
        let fail = |_: &Configuration| -> Result<f64> { Err(Error::Objective("x".into())) };
        let c = select_backend(&fail, &Configuration(vec![]), DEFAULT_THRESHOLD, &clock);
        assert_eq!(c.backend, Backend::Bo);
        assert_eq!(c.probe_score, None);
    }
}
