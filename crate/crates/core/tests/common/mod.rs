//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cash_forge::dataset::{Attribute, AttributeKind, Dataset, Value};
use cash_forge::experience::{ExperienceRecord, ExperienceStore, Level, PaperMeta, VenueType};
use cash_forge::knowledge::KnowledgePair;
use cash_forge::rng::rng_from_seed;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn paper(id: &str, level: Level, venue_type: VenueType, impact_factor: f64, citations: u64) -> PaperMeta {
    PaperMeta {
        paper_id: id.into(),
        level,
        venue_type,
        impact_factor,
        avg_annual_citations: citations,
    }
}

pub fn record(paper: &str, instance: &str, best: &str, others: &[&str]) -> ExperienceRecord {
    ExperienceRecord {
        paper_id: paper.into(),
        instance_id: instance.into(),
        best_algorithm: best.into(),
        other_algorithms: others.iter().map(|s| s.to_string()).collect(),
    }
}

/// The Wine example: five papers whose best algorithms are RandomForest,
/// BayesNet, LDA, J48 and LibSVM. BayesNet and J48 end up as equally
/// supported sources.
pub fn wine_store() -> ExperienceStore {
    let papers = vec![
        paper("G3", Level::B, VenueType::Journal, 1.8, 20),
        paper("G4", Level::A, VenueType::Journal, 4.5, 80),
        paper("G11", Level::C, VenueType::Conference, 0.0, 6),
        paper("G15", Level::A, VenueType::Conference, 0.0, 30),
        paper("G18", Level::B, VenueType::Conference, 0.0, 12),
    ];
    let w = "Wine Dataset";
    let records = vec![
        record("G3", w, "RandomForest", &["NaiveBayes", "LDA", "SMO"]),
        record("G4", w, "BayesNet", &["RandomForest", "LibSVM", "IBk"]),
        record("G11", w, "LDA", &["LibSVM", "Logistic"]),
        record("G15", w, "J48", &["LDA", "RandomForest", "NaiveBayes"]),
        record("G18", w, "LibSVM", &["IBk", "SMO"]),
        record("G4", "Iris", "J48", &["IBk", "SMO"]),
    ];
    ExperienceStore::new(papers, records).unwrap()
}

/// A random corpus with at most 8 algorithms, 6 papers and 5 instances.
/// Paper attributes come from small sets so that reliability ties occur.
pub fn random_store(seed: u64) -> ExperienceStore {
    let mut rng = rng_from_seed(seed);
    let levels = [Level::A, Level::B, Level::C, Level::D];
    let venues = [VenueType::Journal, VenueType::Conference];
    let n_papers = rng.gen_range(1..=6);
    let papers: Vec<PaperMeta> = (0..n_papers)
        .map(|i| {
            paper(
                &format!("P{i}"),
                *levels.choose(&mut rng).unwrap(),
                *venues.choose(&mut rng).unwrap(),
                [0.0, 1.5, 3.0][rng.gen_range(0..3)],
                [0, 10][rng.gen_range(0..2)],
            )
        })
        .collect();
    let n_algos = rng.gen_range(2..=8);
    let algos: Vec<String> = (0..n_algos).map(|i| format!("A{i}")).collect();
    let mut records = Vec::new();
    for inst in 0..rng.gen_range(1..=5) {
        for _ in 0..rng.gen_range(1..=6) {
            let best = algos.choose(&mut rng).unwrap().clone();
            let pool: Vec<&String> = algos.iter().filter(|a| **a != best).collect();
            let k = rng.gen_range(1..=pool.len());
            records.push(ExperienceRecord {
                paper_id: format!("P{}", rng.gen_range(0..n_papers)),
                instance_id: format!("I{inst}"),
                best_algorithm: best,
                other_algorithms: pool.choose_multiple(&mut rng, k).map(|s| s.to_string()).collect(),
            });
        }
    }
    ExperienceStore::new(papers, records).unwrap()
}

/// Papers ascending by reliability, written directly from the comparison rules.
fn oracle_rank(store: &ExperienceStore) -> BTreeMap<String, usize> {
    let level = |l: Level| match l {
        Level::A => 3,
        Level::B => 2,
        Level::C => 1,
        Level::D => 0,
    };
    let mut papers: Vec<&PaperMeta> = store.papers().collect();
    papers.sort_by(|a, b| {
        level(a.level)
            .cmp(&level(b.level))
            .then((a.venue_type == VenueType::Journal).cmp(&(b.venue_type == VenueType::Journal)))
            .then(a.impact_factor.total_cmp(&b.impact_factor))
            .then(a.avg_annual_citations.cmp(&b.avg_annual_citations))
            .then(a.paper_id.cmp(&b.paper_id))
    });
    papers.iter().enumerate().map(|(i, p)| (p.paper_id.clone(), i)).collect()
}

type Edges = BTreeMap<(String, String), usize>;

/// Every simple path from `at` to `to`, folded into the best bottleneck.
fn widest_by_enumeration(edges: &Edges, at: &str, to: &str, visited: &mut Vec<String>, bottleneck: usize, best: &mut Option<usize>) {
    for ((w, l), &weight) in edges {
        if w != at || visited.contains(l) {
            continue;
        }
        let b = bottleneck.min(weight);
        if l == to {
            *best = Some(best.map_or(b, |x: usize| x.max(b)));
        } else {
            visited.push(l.clone());
            widest_by_enumeration(edges, l, to, visited, b, best);
            visited.pop();
        }
    }
}

fn reach(edges: &Edges, from: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([from.to_string()]);
    let mut stack = vec![from.to_string()];
    while let Some(n) = stack.pop() {
        for (w, l) in edges.keys() {
            if *w == n && seen.insert(l.clone()) {
                stack.push(l.clone());
            }
        }
    }
    seen
}

/// Brute-force knowledge acquisition: path enumeration instead of relaxation.
pub fn oracle_knowledge(store: &ExperienceStore, min_algorithms: usize) -> Vec<KnowledgePair> {
    let rank = oracle_rank(store);
    let mut by_instance: BTreeMap<&str, Vec<&ExperienceRecord>> = BTreeMap::new();
    for r in store.records() {
        by_instance.entry(&r.instance_id).or_default().push(r);
    }
    let mut out = Vec::new();
    for (instance, records) in by_instance {
        let mut all = BTreeSet::new();
        for r in &records {
            all.insert(r.best_algorithm.clone());
            all.extend(r.other_algorithms.iter().cloned());
        }
        if all.len() <= min_algorithms {
            continue;
        }
        let oacs: BTreeSet<String> = records.iter().map(|r| r.best_algorithm.clone()).collect();
        let mut direct = Edges::new();
        for r in &records {
            for l in r.other_algorithms.intersection(&oacs) {
                let w = direct.entry((r.best_algorithm.clone(), l.clone())).or_insert(0);
                *w = (*w).max(rank[&r.paper_id]);
            }
        }
        let mut closure = Edges::new();
        for a in &oacs {
            for b in &oacs {
                if a == b {
                    continue;
                }
                let mut best = None;
                widest_by_enumeration(&direct, a, b, &mut vec![a.clone()], usize::MAX, &mut best);
                if let Some(w) = best {
                    closure.insert((a.clone(), b.clone()), w);
                }
            }
        }
        let resolved: Edges = closure
            .iter()
            .filter(|((a, b), w)| closure.get(&(b.clone(), a.clone())).map_or(true, |back| *w > back))
            .map(|(k, w)| (k.clone(), *w))
            .collect();
        let mut winner: Option<(usize, String)> = None;
        for n in &oacs {
            if resolved.keys().any(|(_, l)| l == n) {
                continue;
            }
            let r = reach(&resolved, n);
            let dominated: BTreeSet<&String> = records
                .iter()
                .filter(|rec| r.contains(&rec.best_algorithm))
                .flat_map(|rec| rec.other_algorithms.iter())
                .collect();
            let score = dominated.len();
            if winner.as_ref().map_or(true, |(s, _)| score > *s) {
                winner = Some((score, n.clone()));
            }
        }
        let (support_count, optimal_algorithm) = winner.expect("a conflict-free widest-path graph has a source");
        out.push(KnowledgePair {
            instance_id: instance.to_string(),
            optimal_algorithm,
            support_count,
        });
    }
    out
}

fn num(name: &str) -> Attribute {
    Attribute {
        name: name.into(),
        kind: AttributeKind::Numeric,
    }
}

fn cat(name: &str) -> Attribute {
    Attribute {
        name: name.into(),
        kind: AttributeKind::Categorical,
    }
}

/// Six rows: numeric x, categorical color (2 levels), numeric y = 2x,
/// categorical shape (3 levels), target class.
pub fn six_row_fixture() -> Dataset {
    let rows = [
        (1.0, "red", 2.0, "a", "yes"),
        (2.0, "red", 4.0, "b", "yes"),
        (3.0, "blue", 6.0, "c", "no"),
        (4.0, "red", 8.0, "a", "yes"),
        (5.0, "blue", 10.0, "b", "no"),
        (6.0, "red", 12.0, "a", "yes"),
    ];
    Dataset::new(
        "six",
        vec![num("x"), cat("color"), num("y"), cat("shape"), cat("class")],
        4,
        rows.iter()
            .map(|&(x, c, y, s, t)| vec![Value::Num(x), Value::Cat(c.into()), Value::Num(y), Value::Cat(s.into()), Value::Cat(t.into())])
            .collect(),
    )
    .unwrap()
}

/// Hand-computed f1..f23 of [`six_row_fixture`].
pub const SIX_ROW_EXPECTED: [f64; 23] = [
    2.0,                // classes
    0.9182958340544896, // H(2/3, 1/3)
    0.6666666666666666,
    0.3333333333333333,
    2.0,
    2.0,
    0.5,
    4.0,
    6.0,
    2.0, // color
    0.9182958340544896,
    0.6666666666666666,
    0.3333333333333333,
    3.0, // shape: a=3, b=2, c=1
    1.4591479170272448,
    0.5,
    0.16666666666666666,
    3.5, // mean x
    7.0, // mean y
    2.9166666666666665, // var x = 35/12
    11.666666666666666, // var y = 35/3
    3.0625,             // var of {3.5, 7}
    19.140625,          // var of {35/12, 35/3}
];

/// Dataset with a threshold rule on x0 that a depth-1 tree separates.
pub fn separable(name: &str, n: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let rows = (0..n)
        .map(|_| {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let noise: f64 = rng.gen_range(-1.0..1.0);
            let label = if x > 0.0 { "pos" } else { "neg" };
            vec![Value::Num(x), Value::Num(noise), Value::Cat(label.into())]
        })
        .collect();
    Dataset::new(name, vec![num("x0"), num("x1"), cat("class")], 2, rows).unwrap()
}

/// Largest relative error between the analytic gradient and central finite
/// differences (step `h`) for a random network of the given kind.
pub fn gradient_check(activation: cash_forge::neural_net::Activation, mode: cash_forge::neural_net::OutputMode, seed: u64, h: f64) -> f64 {
    use cash_forge::neural_net::{MlpConfig, MlpModel, OutputMode};
    let mut rng = rng_from_seed(seed);
    let input_dim = rng.gen_range(1..=5);
    let output_dim = rng.gen_range(2..=4);
    let config = MlpConfig {
        hidden_layers: rng.gen_range(1..=3),
        hidden_layer_size: rng.gen_range(5..=8),
        activation,
        ..MlpConfig::default()
    };
    let mut model = MlpModel::<f64>::init(config, input_dim, output_dim, mode, seed).unwrap();
    // nonzero biases so no unit sits exactly on a relu kink
    let params: Vec<f64> = model.parameters().iter().map(|p| p + rng.gen_range(-0.1..0.1)).collect();
    model.set_parameters(&params).unwrap();
    let n = 4;
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let ys: Vec<Vec<f64>> = match mode {
        OutputMode::Regressor => (0..n).map(|_| (0..output_dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
        OutputMode::Classifier => model.one_hot(&(0..n).map(|i| i % output_dim).collect::<Vec<_>>()),
    };
    let analytic = model.gradient(&xs, &ys).unwrap().1.flatten();
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let mut p = params.clone();
        p[i] = params[i] + h;
        model.set_parameters(&p).unwrap();
        let up = model.loss(&xs, &ys).unwrap();
        p[i] = params[i] - h;
        model.set_parameters(&p).unwrap();
        let down = model.loss(&xs, &ys).unwrap();
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
    }
    worst
}

pub mod benchmarks {
    use cash_forge::hpo::{Configuration, Dimension, SearchSpace};
    use cash_forge::Result;

    pub fn one_max_space() -> SearchSpace {
        SearchSpace::new((0..10).map(|i| Dimension::boolean(format!("b{i}"))).collect()).unwrap()
    }

    pub fn one_max(c: &Configuration) -> Result<f64> {
        Ok(c.0.iter().filter(|v| v.as_bool() == Some(true)).count() as f64)
    }

    pub fn sphere_space() -> SearchSpace {
        SearchSpace::new((0..3).map(|i| Dimension::real(format!("x{i}"), -5.0, 5.0)).collect()).unwrap()
    }

    pub fn sphere(c: &Configuration) -> Result<f64> {
        Ok(-c.0.iter().map(|v| v.as_real().unwrap().powi(2)).sum::<f64>())
    }

    pub const QUADRATIC_OPTIMUM: f64 = 0.7;

    pub fn quadratic_space() -> SearchSpace {
        SearchSpace::new(vec![Dimension::real("x", -2.0, 3.0)]).unwrap()
    }

    pub fn quadratic(c: &Configuration) -> Result<f64> {
        Ok(-(c.0[0].as_real().unwrap() - QUADRATIC_OPTIMUM).powi(2))
    }
}

/// A spec that always predicts the training majority class.
pub fn majority_spec() -> cash_forge::portfolio::AlgorithmSpec {
    use cash_forge::hpo::{Configuration, Dimension, SearchSpace};
    use cash_forge::portfolio::{AlgorithmSpec, Capabilities, Classifier, Encoded};

    struct Majority(usize);
    impl Classifier for Majority {
        fn predict(&self, _: &[f64]) -> usize {
            self.0
        }
    }
    fn train(data: &Encoded, _: &Configuration, _: u64) -> cash_forge::Result<Box<dyn Classifier>> {
        let counts = data.class_counts();
        let best = (0..counts.len()).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).unwrap();
        Ok(Box::new(Majority(best)))
    }
    AlgorithmSpec {
        name: "majority".into(),
        search_space: SearchSpace::new(vec![Dimension::boolean("unused")]).unwrap(),
        capabilities: Capabilities {
            handles_numeric: true,
            handles_categorical: true,
            handles_multiclass: true,
        },
        trainer: train,
    }
}

/// Binary data with an 80/20 class split and uninformative attributes.
pub fn imbalanced(n: usize) -> Dataset {
    let rows = (0..n)
        .map(|i| {
            let label = if i % 5 == 0 { "rare" } else { "common" };
            vec![Value::Num(i as f64), Value::Cat(label.into())]
        })
        .collect();
    Dataset::new("imbalanced", vec![num("x"), cat("class")], 1, rows).unwrap()
}

/// Named scores, `None` for members that cannot process the dataset.
pub fn scores(items: &[(&str, Option<f64>)]) -> Vec<(String, Option<f64>)> {
    items.iter().map(|(n, p)| (n.to_string(), *p)).collect()
}

/// Training budgets small enough for tests.
pub fn fast_dmd_config() -> cash_forge::pipeline::DmdConfig {
    use cash_forge::hpo::GaParams;
    let mut cfg = cash_forge::pipeline::DmdConfig::default();
    cfg.features.ga = GaParams {
        population_size: 12,
        max_generations: 5,
        ..GaParams::default()
    };
    cfg.architecture.ga = GaParams {
        population_size: 8,
        max_generations: 3,
        ..GaParams::default()
    };
    cfg
}

/// Tuning budgets small enough for tests; no time limit, so runs are reproducible.
pub fn fast_udr_config() -> cash_forge::pipeline::UdrConfig {
    use cash_forge::hpo::GaParams;
    cash_forge::pipeline::UdrConfig {
        time_limit_secs: 600.0,
        folds: 5,
        ga: GaParams {
            population_size: 6,
            max_generations: 2,
            ..GaParams::default()
        },
        ..cash_forge::pipeline::UdrConfig::default()
    }
}
