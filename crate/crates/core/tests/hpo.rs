mod common;

use std::time::Duration;

use cash_forge::hpo::{
    bo_optimize, expected_improvement, ga_optimize, random_search, select_backend, Backend, BoParams, Clock, Configuration, Dimension,
    GaParams, ParamValue, RunControl, SearchSpace, SimulatedClock, StopReason, DEFAULT_THRESHOLD,
};
use cash_forge::{Error, GaussianProcess, Result};
use common::benchmarks::*;
use proptest::prelude::*;

fn median(mut v: Vec<usize>) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

#[test]
fn ga_solves_one_max_every_seed() {
    for seed in 0..10 {
        let control = RunControl {
            seed,
            stop_score: Some(10.0),
            ..RunControl::default()
        };
        let r = ga_optimize(&one_max_space(), &one_max, &GaParams::default(), &control).unwrap();
        assert_eq!(r.best_score, 10.0, "seed {seed}");
        assert_eq!(r.stop_reason, StopReason::StopScore);
    }
}

#[test]
fn ga_beats_random_search_on_one_max() {
    let to_optimum = |r: cash_forge::hpo::OptimizationResult| r.first_reaching(10.0).map_or(usize::MAX, |i| i + 1);
    let (mut ga, mut rs) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let control = RunControl {
            seed,
            stop_score: Some(10.0),
            ..RunControl::default()
        };
        ga.push(to_optimum(ga_optimize(&one_max_space(), &one_max, &GaParams::default(), &control).unwrap()));
        rs.push(to_optimum(random_search(&one_max_space(), &one_max, 5000, &control).unwrap()));
    }
    assert!(median(ga.clone()) <= median(rs.clone()), "ga {ga:?} random {rs:?}");
}

#[test]
fn ga_gets_close_on_sphere() {
    let hits = (0..10)
        .filter(|&seed| ga_optimize(&sphere_space(), &sphere, &GaParams::default(), &RunControl::seeded(seed)).unwrap().best_score >= -0.1)
        .count();
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn bo_locates_quadratic_optimum() {
    let params = BoParams {
        max_evaluations: 20,
        ..BoParams::default()
    };
    let mut hits = 0;
    for seed in 0..10 {
        let r = bo_optimize(&quadratic_space(), &quadratic, &params, &RunControl::seeded(seed)).unwrap();
        assert!(r.evaluation_count <= 20);
        assert!(r.acquisition.iter().all(|a| a.min_ei >= 0.0));
        if (r.best_configuration.0[0].as_real().unwrap() - QUADRATIC_OPTIMUM).abs() <= 0.05 {
            hits += 1;
        }
    }
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn best_is_the_maximum_of_history() {
    let r = ga_optimize(&sphere_space(), &sphere, &GaParams { max_generations: 5, ..GaParams::default() }, &RunControl::seeded(4)).unwrap();
    let max = r.history.iter().map(|e| e.score).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(r.best_score, max);
    assert!(sphere_space().contains(&r.best_configuration));
}

#[test]
fn failures_score_minus_infinity_without_aborting() {
    let flaky = |c: &Configuration| -> Result<f64> {
        let x = c.0[0].as_real().unwrap();
        if x < 0.0 {
            Err(Error::Objective("negative".into()))
        } else {
            Ok(-x)
        }
    };
    let space = SearchSpace::new(vec![Dimension::real("x", -1.0, 1.0)]).unwrap();
    let r = ga_optimize(&space, &flaky, &GaParams { max_generations: 3, ..GaParams::default() }, &RunControl::seeded(1)).unwrap();
    assert!(r.history.iter().any(|e| e.score == f64::NEG_INFINITY));
    assert!(r.best_score.is_finite());
}

#[test]
fn default_configuration_is_evaluated_first() {
    let space = sphere_space();
    let default = space.default_configuration();
    let control = RunControl {
        seed: 2,
        initial: vec![default.clone()],
        ..RunControl::default()
    };
    let r = ga_optimize(&space, &sphere, &GaParams { max_generations: 2, ..GaParams::default() }, &control).unwrap();
    assert_eq!(r.history[0].configuration, default);
    assert!(r.best_score >= r.history[0].score);
}

#[test]
fn time_limit_returns_best_so_far() {
    let clock = SimulatedClock::new();
    let slow = |c: &Configuration| -> Result<f64> {
        clock.advance(Duration::from_secs(1));
        sphere(c)
    };
    let control = RunControl {
        seed: 3,
        time_limit: Some(Duration::from_secs(30)),
        ..RunControl::default()
    };
    let r = cash_forge::hpo::ga_optimize_with_clock(&sphere_space(), &slow, &GaParams::default(), &control, &clock).unwrap();
    assert_eq!(r.stop_reason, StopReason::TimeLimit);
    assert!(r.evaluation_count <= 31);
    assert!(clock.now() <= Duration::from_secs(33));
}

#[test]
fn selector_threshold() {
    for (secs, expected) in [(1, Backend::Ga), (900, Backend::Bo)] {
        let clock = SimulatedClock::new();
        let probe = |_: &Configuration| -> Result<f64> {
            clock.advance(Duration::from_secs(secs));
            Ok(0.5)
        };
        let choice = select_backend(&probe, &Configuration(vec![ParamValue::Bool(true)]), DEFAULT_THRESHOLD, &clock);
        assert_eq!(choice.backend, expected);
        assert_eq!(choice.probe_score, Some(0.5));
    }
}

proptest! {
    #[test]
    fn ei_is_nonnegative(mean in -10.0f64..10.0, sd in 0.0f64..5.0, best in -10.0f64..10.0) {
        prop_assert!(expected_improvement(mean, sd, best) >= 0.0);
    }

    #[test]
    fn ei_at_noiseless_sample_is_tiny(xs in prop::collection::btree_set(0u32..100, 3..8), probe in any::<prop::sample::Index>()) {
        let xs: Vec<f64> = xs.into_iter().map(|v| f64::from(v) / 100.0).collect();
        let inputs: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (6.0 * x).sin()).collect();
        let gp = GaussianProcess::fit(&inputs, &ys, 0.2, 0.0).unwrap();
        let best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let i = probe.index(xs.len());
        let at_sample = gp.expected_improvement(&inputs[i], best);
        let incumbent = ys.iter().position(|&y| y == best).unwrap();
        prop_assert!(at_sample <= gp.expected_improvement(&inputs[incumbent], best) + 1e-9);
    }

    #[test]
    fn ga_results_stay_in_space(seed in any::<u64>()) {
        let space = SearchSpace::new(vec![
            Dimension::integer("k", 1, 25),
            Dimension::log_real("c", 1e-4, 1e2),
            Dimension::categorical("d", ["a", "b", "c"]),
            Dimension::boolean("f"),
        ]).unwrap();
        let obj = |c: &Configuration| -> Result<f64> { Ok(c.0[0].as_int().unwrap() as f64 - c.0[1].as_real().unwrap()) };
        let r = ga_optimize(&space, &obj, &GaParams { population_size: 8, max_generations: 3, ..GaParams::default() }, &RunControl::seeded(seed)).unwrap();
        prop_assert!(r.history.iter().all(|e| space.contains(&e.configuration)));
    }
}
