use super::{Objective, OptimizationResult, RunControl, SearchSpace, StopReason, Tracker, WallClock};
use crate::error::Result;
use crate::rng::{derive_seed, rng_from_seed};

/// Uniform random search; the baseline the model-based backends are measured against.
pub fn random_search(
    space: &SearchSpace,
    objective: &dyn Objective,
    max_evaluations: usize,
    control: &RunControl,
) -> Result<OptimizationResult> {
    let clock = WallClock::new();
    let mut tracker = Tracker::new(space, objective, &clock, control)?;
    let mut rng = rng_from_seed(derive_seed(control.seed, "random"));
    // repeated draws hit the cache but still spend budget
    for _ in 0..max_evaluations {
        let c = space.sample(&mut rng);
        if tracker.evaluate(&c).is_none() || tracker.stopped().is_some() {
            break;
        }
    }
    tracker.finish(StopReason::Budget, Vec::new())
}
