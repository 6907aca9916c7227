//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line with
//! its elapsed time; the test fails if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use cash_forge::dataset::Dataset;
use cash_forge::experience::{rank_papers, ExperienceRecord};
use cash_forge::hpo::{
    bo_optimize, ga_optimize, select_backend, Backend, BoParams, Configuration, GaParams, ParamValue, RunControl, SimulatedClock,
    DEFAULT_THRESHOLD,
};
use cash_forge::knowledge::{acquire_instance, acquire_knowledge, candidates, DEFAULT_MIN_ALGORITHMS};
use cash_forge::meta_features::extract;
use cash_forge::neural_net::{Activation, OutputMode};
use cash_forge::pipeline::{recommend, run_dmd, run_dmd_with, run_udr, RecommendOutcome};
use cash_forge::portfolio::{pmax_pavg_from_scores, poratio_from_scores};
use cash_forge::synthetic::{planted_corpus, planted_datasets};
use cash_forge::{builtin_portfolio, DecisionModel, PoRatio, Result};
use common::benchmarks::*;
use common::{fast_dmd_config, fast_udr_config, gradient_check, oracle_knowledge, random_store, scores, six_row_fixture, wine_store};
use rand::seq::SliceRandom;

type Outcome = std::result::Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn knowledge_oracle() -> Outcome {
    for seed in 0..200u64 {
        let store = random_store(seed);
        let min = 1 + (seed % DEFAULT_MIN_ALGORITHMS as u64) as usize;
        let got = acquire_knowledge(&store, min).map_err(|e| e.to_string())?;
        check(got == oracle_knowledge(&store, min), format!("corpus {seed} disagrees with the oracle"))?;
    }
    Ok("200/200 corpora agree".into())
}

fn wine_example() -> Outcome {
    let store = wine_store();
    let rank = rank_papers(store.papers()).map_err(|e| e.to_string())?;
    let records: Vec<&ExperienceRecord> = store.records().iter().filter(|r| r.instance_id == "Wine Dataset").collect();
    let mut oacs: Vec<String> = candidates(&records).into_iter().collect();
    oacs.sort();
    let mut expected = vec!["BayesNet", "J48", "LDA", "LibSVM", "RandomForest"];
    expected.sort_unstable();
    check(oacs == expected, format!("candidates {oacs:?}"))?;
    let pair = acquire_instance(&records, &rank, DEFAULT_MIN_ALGORITHMS).map_err(|e| e.to_string())?.pair.ok_or("no pair")?;
    check(["BayesNet", "J48"].contains(&pair.optimal_algorithm.as_str()), format!("elected {}", pair.optimal_algorithm))?;
    Ok(format!("elected {}", pair.optimal_algorithm))
}

fn features(ds: &Dataset) -> Vec<f64> {
    extract::<f64>(ds).as_slice().to_vec()
}

fn rebuild(ds: &Dataset, rows: &[usize]) -> Dataset {
    let data = rows.iter().map(|&r| (0..ds.attributes().len()).map(|c| ds.value(r, c)).collect()).collect();
    Dataset::new(ds.name(), ds.attributes().to_vec(), ds.target_index(), data).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

fn meta_feature_oracle() -> Outcome {
    let got = features(&six_row_fixture());
    for (i, (g, e)) in got.iter().zip(common::SIX_ROW_EXPECTED).enumerate() {
        check((g - e).abs() <= 1e-9, format!("fixture f{} = {g}, expected {e}", i + 1))?;
    }
    let mut rng = cash_forge::rng::rng_from_seed(5);
    for (ds, _) in planted_datasets("acc", 50, 9).map_err(|e| e.to_string())? {
        let base = features(&ds);
        let mut rows: Vec<usize> = (0..ds.n_rows()).collect();
        rows.shuffle(&mut rng);
        check(close(&features(&rebuild(&ds, &rows)), &base, 1e-9), format!("{}: row permutation", ds.name()))?;
        let doubled: Vec<usize> = (0..ds.n_rows()).chain(0..ds.n_rows()).collect();
        let mut dup = features(&rebuild(&ds, &doubled));
        dup[8] /= 2.0;
        check(close(&dup, &base, 1e-9), format!("{}: row duplication", ds.name()))?;
    }
    Ok("fixture within 1e-9, invariants on 50 datasets".into())
}

fn mlp_gradients() -> Outcome {
    let mut worst: f64 = 0.0;
    for activation in Activation::ALL {
        for mode in [OutputMode::Classifier, OutputMode::Regressor] {
            for seed in 0..10 {
                worst = worst.max(gradient_check(activation, mode, seed, 1e-5));
            }
        }
    }
    check(worst < 1e-4, format!("max relative error {worst:.2e}"))?;
    Ok(format!("max relative error {worst:.2e}"))
}

fn ga_benchmarks() -> Outcome {
    let mut one_max_hits = 0;
    for seed in 0..10 {
        let control = RunControl {
            seed,
            stop_score: Some(10.0),
            ..RunControl::default()
        };
        let params = GaParams {
            max_generations: 100,
            ..GaParams::default()
        };
        if ga_optimize(&one_max_space(), &one_max, &params, &control).map_err(|e| e.to_string())?.best_score == 10.0 {
            one_max_hits += 1;
        }
    }
    let mut sphere_hits = 0;
    for seed in 0..10 {
        if ga_optimize(&sphere_space(), &sphere, &GaParams::default(), &RunControl::seeded(seed)).map_err(|e| e.to_string())?.best_score >= -0.1
        {
            sphere_hits += 1;
        }
    }
    let summary = format!("one-max {one_max_hits}/10, sphere {sphere_hits}/10");
    check(one_max_hits == 10 && sphere_hits >= 9, summary.clone())?;
    Ok(summary)
}

fn bo_benchmark() -> Outcome {
    let params = BoParams {
        max_evaluations: 20,
        ..BoParams::default()
    };
    let mut hits = 0;
    for seed in 0..10 {
        let r = bo_optimize(&quadratic_space(), &quadratic, &params, &RunControl::seeded(seed)).map_err(|e| e.to_string())?;
        check(r.evaluation_count <= 20, format!("seed {seed}: {} evaluations", r.evaluation_count))?;
        check(r.acquisition.iter().all(|a| a.min_ei >= 0.0), format!("seed {seed}: negative EI"))?;
        let x = r.best_configuration.0[0].as_real().ok_or("non-real optimum")?;
        if (x - QUADRATIC_OPTIMUM).abs() <= 0.05 {
            hits += 1;
        }
    }
    check(hits >= 9, format!("{hits}/10 within 0.05"))?;
    Ok(format!("{hits}/10 within 0.05, EI nonnegative"))
}

fn backend_selector() -> Outcome {
    for (secs, expected) in [(1, Backend::Ga), (900, Backend::Bo)] {
        let clock = SimulatedClock::new();
        let probe = |_: &Configuration| -> Result<f64> {
            clock.advance(Duration::from_secs(secs));
            Ok(0.5)
        };
        let choice = select_backend(&probe, &Configuration(vec![ParamValue::Bool(true)]), DEFAULT_THRESHOLD, &clock);
        check(choice.backend == expected, format!("{secs} s probe chose {:?}", choice.backend))?;
    }
    Ok("1 s -> ga, 900 s -> bo".into())
}

fn metric_fixtures() -> Outcome {
    let s = scores(&[("a", Some(0.9)), ("b", Some(0.8)), ("c", Some(0.8))]);
    let with_none = scores(&[("a", Some(0.6)), ("b", Some(0.7)), ("x", None)]);
    let ratios = [
        (poratio_from_scores("b", &s), PoRatio::new(2, 3)),
        (poratio_from_scores("a", &s), PoRatio::new(1, 1)),
        (poratio_from_scores("a", &with_none), PoRatio::new(2, 3)),
        (poratio_from_scores("x", &with_none), PoRatio::new(1, 3)),
    ];
    for (got, want) in ratios {
        check(got.as_ref().ok() == Some(&want), format!("PORatio {got:?}, expected {want}"))?;
    }
    let pm = pmax_pavg_from_scores(&scores(&[("a", Some(0.9)), ("b", Some(0.7)), ("c", None)])).map_err(|e| e.to_string())?;
    check(pm == (0.9, 0.8), format!("Pmax/Pavg {pm:?}"))?;
    check(pmax_pavg_from_scores(&scores(&[("c", None)])).is_err(), "all-inapplicable Pmax accepted")?;
    Ok("PORatio, Pmax, Pavg exact".into())
}

fn synthetic_recovery() -> Outcome {
    let portfolio = builtin_portfolio();
    let mut good_seeds = 0;
    let mut report = Vec::new();
    for seed in 0..5u64 {
        let corpus = planted_corpus(60, seed).map_err(|e| e.to_string())?;
        let out = run_dmd_with(&corpus.store, Some(&corpus.aliases), &portfolio, |id| Ok(corpus.datasets[id].clone()), &fast_dmd_config(), seed)
            .map_err(|e| e.to_string())?;
        let test = planted_datasets("held", 20, seed + 1000).map_err(|e| e.to_string())?;
        let mut hits = 0;
        for (ds, truth) in &test {
            if recommend(&out.model, ds, &portfolio).map_err(|e| e.to_string())?.algorithm == *truth {
                hits += 1;
            }
            let rec = run_udr(&out.model, ds, &portfolio, &fast_udr_config(), seed).map_err(|e| e.to_string())?;
            if let (Some(tuned), Some(default)) = (rec.tuned_score, rec.default_score) {
                check(tuned >= default, format!("seed {seed} {}: tuned {tuned} < default {default}", ds.name()))?;
            }
        }
        if hits * 10 >= 9 * test.len() {
            good_seeds += 1;
        }
        report.push(format!("{hits}/{}", test.len()));
    }
    let summary = format!("held-out accuracy per seed [{}], tuned >= default everywhere", report.join(", "));
    check(good_seeds >= 4, summary.clone())?;
    Ok(summary)
}

fn train_and_recommend(dir: &std::path::Path, test: &[(Dataset, &str)]) -> std::result::Result<(DecisionModel, Vec<RecommendOutcome>), String> {
    let files = planted_corpus(60, 7).and_then(|c| c.write_to(dir)).map_err(|e| e.to_string())?;
    let portfolio = builtin_portfolio();
    let out = run_dmd(&files.experiences, &files.registry, Some(&files.aliases), &portfolio, &fast_dmd_config(), 7).map_err(|e| e.to_string())?;
    let path = dir.join("model.json");
    out.model.save(&path).map_err(|e| e.to_string())?;
    let model = DecisionModel::load(&path).map_err(|e| e.to_string())?;
    let recs = test.iter().map(|(ds, _)| recommend(&model, ds, &portfolio)).collect::<Result<Vec<_>>>().map_err(|e| e.to_string())?;
    for (ds, _) in test {
        let f = extract::<f64>(ds);
        let (a, b) = (out.model.scores(&f).map_err(|e| e.to_string())?, model.scores(&f).map_err(|e| e.to_string())?);
        check(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-9), "save/load changed predictions")?;
    }
    Ok((model, recs))
}

fn determinism() -> Outcome {
    let test = planted_datasets("det", 10, 99).map_err(|e| e.to_string())?;
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let (model_a, recs_a) = train_and_recommend(a.path(), &test)?;
    let (model_b, recs_b) = train_and_recommend(b.path(), &test)?;
    check(model_a == model_b, "repeated training produced different models")?;
    check(recs_a == recs_b, "repeated runs recommended differently")?;
    Ok("identical models and recommendations, save/load within 1e-9".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("knowledge graph matches brute-force oracle", 60, knowledge_oracle),
        ("Wine worked example", 1, wine_example),
        ("meta-feature oracle and invariants", 10, meta_feature_oracle),
        ("MLP gradient check", 30, mlp_gradients),
        ("GA benchmarks", 60, ga_benchmarks),
        ("BO benchmark", 60, bo_benchmark),
        ("backend selector", 1, backend_selector),
        ("PORatio/Pmax/Pavg arithmetic", 1, metric_fixtures),
        ("end-to-end synthetic recovery", 600, synthetic_recovery),
        ("determinism and serialization", 300, determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok(d) if secs < *limit as f64 => (true, d),
            Ok(d) => (false, format!("{d}; took {secs:.1} s, limit {limit} s")),
            Err(e) => (false, e),
        };
        println!("{} criterion {}: {name}: {detail} ({secs:.2} s)", if ok { "PASS" } else { "FAIL" }, i + 1);
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
