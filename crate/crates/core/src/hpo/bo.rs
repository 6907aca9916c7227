use serde::{Deserialize, Serialize};

use super::gp::GaussianProcess;
use super::{AcquisitionStep, Clock, Configuration, Objective, OptimizationResult, RunControl, SearchSpace, StopReason, Tracker, WallClock};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Bayesian-optimization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoParams {
    pub max_evaluations: usize,
    /// Random points drawn before the surrogate is used.
    pub initial_design: usize,
    pub candidates: usize,
    pub length_scales: Vec<f64>,
    pub noise_levels: Vec<f64>,
}

impl Default for BoParams {
    fn default() -> Self {
        BoParams {
            max_evaluations: 50,
            initial_design: 5,
            candidates: 1000,
            length_scales: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0],
            noise_levels: vec![1e-6, 1e-4, 1e-2],
        }
    }
}

impl BoParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_evaluations < 2 {
            return Err(Error::range("max_evaluations", self.max_evaluations, ">= 2"));
        }
        if self.candidates == 0 {
            return Err(Error::range("candidates", 0, ">= 1"));
        }
        if self.length_scales.is_empty() || self.length_scales.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::range("length_scales", format!("{:?}", self.length_scales), "nonempty, all > 0"));
        }
        if self.noise_levels.is_empty() || self.noise_levels.iter().any(|&n| !(n >= 0.0)) {
            return Err(Error::range("noise_levels", format!("{:?}", self.noise_levels), "nonempty, all >= 0"));
        }
        Ok(())
    }
}

/// Maximizes `objective` with a GP surrogate and expected improvement, using the wall clock.
pub fn bo_optimize(space: &SearchSpace, objective: &dyn Objective, params: &BoParams, control: &RunControl) -> Result<OptimizationResult> {
    bo_optimize_with_clock(space, objective, params, control, &WallClock::new())
}

/// Surrogate targets: failed points are placed one score-range below the worst success.
fn surrogate_targets(scores: &[f64]) -> Option<Vec<f64>> {
    let finite: Vec<f64> = scores.iter().copied().filter(|s| s.is_finite()).collect();
    if finite.is_empty() {
        return None;
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = lo - (hi - lo).max(1.0);
    Some(scores.iter().map(|&s| if s.is_finite() { s } else { floor }).collect())
}

pub fn bo_optimize_with_clock(
    space: &SearchSpace,
    objective: &dyn Objective,
    params: &BoParams,
    control: &RunControl,
    clock: &dyn Clock,
) -> Result<OptimizationResult> {
    params.validate()?;
    let mut tracker = Tracker::new(space, objective, clock, control)?;
    let mut rng = rng_from_seed(derive_seed(control.seed, "bo"));
    let budget = params.max_evaluations;
    let initial = params.initial_design.min(budget);
    let mut steps = Vec::new();

    let mut running = true;
    for c in &control.initial {
        if tracker.history().len() >= budget {
            break;
        }
        running = tracker.evaluate(c).is_some() && tracker.stopped().is_none();
        if !running {
            break;
        }
    }
    let mut draws = 0;
    while running && tracker.history().len() < initial && draws < initial * 100 {
        draws += 1;
        let c = space.sample(&mut rng);
        if tracker.is_known(&c) {
            continue;
        }
        running = tracker.evaluate(&c).is_some() && tracker.stopped().is_none();
    }

    let mut exhausted = false;
    while running && tracker.history().len() < budget {
        let xs: Vec<Vec<f64>> = tracker.history().iter().map(|e| space.embed(&e.configuration)).collect();
        let scores: Vec<f64> = tracker.history().iter().map(|e| e.score).collect();
        let candidates: Vec<Configuration> = (0..params.candidates)
            .map(|_| space.sample(&mut rng))
            .filter(|c| !tracker.is_known(c))
            .collect();
        if candidates.is_empty() {
            exhausted = true;
            break;
        }
        let next = match surrogate_targets(&scores) {
            None => candidates[0].clone(),
            Some(ys) => {
                let gp = GaussianProcess::fit_grid(&xs, &ys, &params.length_scales, &params.noise_levels)?;
                let best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let eis: Vec<f64> = candidates
                    .iter()
                    .map(|c| gp.expected_improvement(&space.embed(c), best))
                    .collect();
                let mut arg = 0;
                for (i, &e) in eis.iter().enumerate() {
                    if e > eis[arg] {
                        arg = i;
                    }
                }
                steps.push(AcquisitionStep {
                    min_ei: eis.iter().copied().fold(f64::INFINITY, f64::min),
                    max_ei: eis[arg],
                    length_scale: gp.length_scale(),
                    noise: gp.noise(),
                });
                candidates[arg].clone()
            }
        };
        running = tracker.evaluate(&next).is_some() && tracker.stopped().is_none();
    }
    let reason = if exhausted { StopReason::Exhausted } else { StopReason::Budget };
    tracker.finish(reason, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hpo::Dimension;

    fn quadratic(c: &Configuration) -> Result<f64> {
        let x = c.0[0].as_real().unwrap();
        Ok(-(x - 0.3) * (x - 0.3))
    }

    fn unit() -> SearchSpace {
        SearchSpace::new(vec![Dimension::real("x", 0.0, 1.0)]).unwrap()
    }

    #[test]
    fn initial_design_only() {
        let params = BoParams {
            max_evaluations: 5,
            ..BoParams::default()
        };
        let r = bo_optimize(&unit(), &quadratic, &params, &RunControl::seeded(1)).unwrap();
        assert_eq!(r.history.len(), 5);
        assert!(r.acquisition.is_empty());
    }

    #[test]
    fn finds_quadratic_optimum() {
        let params = BoParams {
            max_evaluations: 20,
            ..BoParams::default()
        };
        let r = bo_optimize(&unit(), &quadratic, &params, &RunControl::seeded(7)).unwrap();
        let x = r.best_configuration.0[0].as_real().unwrap();
        assert!((x - 0.3).abs() < 0.05, "x = {x}");
        assert!(r.acquisition.iter().all(|s| s.min_ei >= 0.0));
    }

    #[test]
    fn constant_objective_is_fine() {
        let params = BoParams {
            max_evaluations: 10,
            candidates: 200,
            ..BoParams::default()
        };
        let r = bo_optimize(&unit(), &|_: &Configuration| Ok(1.0), &params, &RunControl::seeded(2)).unwrap();
        assert_eq!(r.best_score, 1.0);
        assert_eq!(r.history.len(), 10);
    }

    #[test]
    fn small_discrete_space_exhausts() {
        let space = SearchSpace::new(vec![Dimension::boolean("b")]).unwrap();
        let obj = |c: &Configuration| Ok(if c.0[0].as_bool().unwrap() { 1.0 } else { 0.0 });
        let params = BoParams {
            max_evaluations: 10,
            ..BoParams::default()
        };
        let r = bo_optimize(&space, &obj, &params, &RunControl::seeded(3)).unwrap();
        assert_eq!(r.history.len(), 2);
        assert_eq!(r.stop_reason, StopReason::Exhausted);
        assert_eq!(r.best_score, 1.0);
    }
}
