use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Clock, Configuration, Objective, OptimizationResult, RunControl, SearchSpace, StopReason, Tracker, WallClock};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Genetic-algorithm settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population_size: usize,
    /// Generations bred after the initial population.
    pub max_generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / dimensions`.
    pub mutation_rate: Option<f64>,
    /// Half-width of a ranged mutation as a fraction of the range.
    pub mutation_step: f64,
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 50,
            max_generations: 100,
            tournament_size: 3,
            crossover_rate: 0.9,
            mutation_rate: None,
            mutation_step: 0.1,
            elitism: 1,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::range("population_size", self.population_size, ">= 2"));
        }
        if self.tournament_size == 0 {
            return Err(Error::range("tournament_size", 0, ">= 1"));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::range("crossover_rate", self.crossover_rate, "0-1"));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::range("mutation_rate", m, "0-1"));
            }
        }
        if !(self.mutation_step > 0.0 && self.mutation_step <= 1.0) {
            return Err(Error::range("mutation_step", self.mutation_step, "(0, 1]"));
        }
        if self.elitism >= self.population_size {
            return Err(Error::range("elitism", self.elitism, "< population_size"));
        }
        Ok(())
    }
}

type Member = (Configuration, f64);

fn tournament<'p>(pop: &'p [Member], size: usize, rng: &mut impl Rng) -> &'p Configuration {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..size {
        let i = rng.gen_range(0..pop.len());
        if pop[i].1 > pop[best].1 || (pop[i].1 == pop[best].1 && i < best) {
            best = i;
        }
    }
    &pop[best].0
}

fn breed(
    space: &SearchSpace,
    params: &GaParams,
    a: &Configuration,
    b: &Configuration,
    rng: &mut impl Rng,
) -> [Configuration; 2] {
    let (mut x, mut y) = (a.clone(), b.clone());
    if rng.gen::<f64>() < params.crossover_rate {
        for i in 0..space.len() {
            if rng.gen::<bool>() {
                std::mem::swap(&mut x.0[i], &mut y.0[i]);
            }
        }
    }
    let rate = params.mutation_rate.unwrap_or(1.0 / space.len().max(1) as f64);
    for child in [&mut x, &mut y] {
        for (d, v) in space.dimensions.iter().zip(child.0.iter_mut()) {
            if rng.gen::<f64>() < rate {
                *v = d.mutate(v, params.mutation_step, rng);
            }
        }
    }
    [x, y]
}

/// Evaluates candidates into `pop` until it is full or the run stops.
fn fill(tracker: &mut Tracker, pop: &mut Vec<Member>, target: usize, candidates: impl IntoIterator<Item = Configuration>) -> bool {
    for c in candidates {
        if pop.len() >= target {
            break;
        }
        match tracker.evaluate(&c) {
            Some(s) => pop.push((c, s)),
            None => return false,
        }
        if tracker.stopped().is_some() {
            return false;
        }
    }
    true
}

/// Maximizes `objective` over `space` with a generational GA using the wall clock.
pub fn ga_optimize(space: &SearchSpace, objective: &dyn Objective, params: &GaParams, control: &RunControl) -> Result<OptimizationResult> {
    ga_optimize_with_clock(space, objective, params, control, &WallClock::new())
}

pub fn ga_optimize_with_clock(
    space: &SearchSpace,
    objective: &dyn Objective,
    params: &GaParams,
    control: &RunControl,
    clock: &dyn Clock,
) -> Result<OptimizationResult> {
    params.validate()?;
    let mut tracker = Tracker::new(space, objective, clock, control)?;
    let mut rng = rng_from_seed(derive_seed(control.seed, "ga"));
    let n = params.population_size;

    // Warm-start entries and injected configurations seed the population.
    let mut pop: Vec<Member> = tracker
        .history()
        .iter()
        .take(n)
        .map(|e| (e.configuration.clone(), e.score))
        .collect();
    let mut running = fill(&mut tracker, &mut pop, n, control.initial.iter().cloned());
    while running && pop.len() < n {
        let c = space.sample(&mut rng);
        running = fill(&mut tracker, &mut pop, n, [c]);
    }
    if running && pop.iter().all(|m| m.1 == f64::NEG_INFINITY) {
        return Err(Error::AllFailed(0));
    }

    for generation in 1..=params.max_generations {
        if !running {
            break;
        }
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&i, &j| pop[j].1.total_cmp(&pop[i].1).then(i.cmp(&j)));
        let mut next: Vec<Member> = order.iter().take(params.elitism).map(|&i| pop[i].clone()).collect();
        while running && next.len() < n {
            let a = tournament(&pop, params.tournament_size, &mut rng).clone();
            let b = tournament(&pop, params.tournament_size, &mut rng).clone();
            let children = breed(space, params, &a, &b, &mut rng);
            running = fill(&mut tracker, &mut next, n, children);
        }
        if running && next.iter().all(|m| m.1 == f64::NEG_INFINITY) {
            return Err(Error::AllFailed(generation));
        }
        pop = next;
    }
    tracker.finish(StopReason::Budget, Vec::new())
}
