//! Seeded generators for datasets and experience corpora with a known answer.
//!
//! The planted rule picks the optimal algorithm from the class count (f1) and
//! the numeric attribute proportion (f7):
//!
//! | attributes | f1 <= 3 | f1 > 3 |
//! |---|---|---|
//! | all numeric | `knn` | `logistic_regression` |
//! | all categorical | `categorical_nb` | `decision_tree` |
//! | mixed | `random_forest` | `decision_tree` |

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{Attribute, AttributeKind, Dataset, Value};
use crate::error::{Error, Result};
use crate::experience::{AliasMap, ExperienceRecord, ExperienceStore, Level, PaperMeta, VenueType};
use crate::rng::{derive_indexed, derive_seed, rng_from_seed, Rng as SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetShape {
    pub n_rows: usize,
    pub n_classes: usize,
    pub n_numeric: usize,
    pub n_categorical: usize,
}

/// A dataset whose attributes carry class signal: numeric columns are
/// class-centred with uniform noise, categorical columns favour a
/// class-specific level. Every class occurs at least once.
pub fn generate_dataset(name: &str, shape: DatasetShape, seed: u64) -> Result<Dataset> {
    if shape.n_classes < 2 || shape.n_rows < shape.n_classes {
        return Err(Error::Dataset(format!("cannot generate shape {shape:?}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut labels: Vec<usize> = (0..shape.n_rows).map(|i| i % shape.n_classes).collect();
    labels.shuffle(&mut rng);

    let mut attributes = Vec::new();
    let mut columns: Vec<Vec<Value>> = Vec::new();
    for j in 0..shape.n_numeric {
        let scale = rng.gen_range(0.5..5.0);
        let offset = rng.gen_range(-10.0..10.0);
        let centres: Vec<f64> = (0..shape.n_classes).map(|_| rng.gen_range(-2.0..2.0)).collect();
        attributes.push(Attribute {
            name: format!("x{j}"),
            kind: AttributeKind::Numeric,
        });
        columns.push(
            labels
                .iter()
                .map(|&c| Value::Num(offset + scale * (centres[c] + rng.gen_range(-1.5..1.5))))
                .collect(),
        );
    }
    for j in 0..shape.n_categorical {
        let levels = rng.gen_range(2..=5usize);
        let preferred: Vec<usize> = (0..shape.n_classes).map(|_| rng.gen_range(0..levels)).collect();
        attributes.push(Attribute {
            name: format!("a{j}"),
            kind: AttributeKind::Categorical,
        });
        columns.push(
            labels
                .iter()
                .map(|&c| {
                    let level = if rng.gen_bool(0.6) { preferred[c] } else { rng.gen_range(0..levels) };
                    Value::Cat(format!("v{level}"))
                })
                .collect(),
        );
    }
    attributes.push(Attribute {
        name: "class".into(),
        kind: AttributeKind::Categorical,
    });
    columns.push(labels.iter().map(|&c| Value::Cat(format!("c{c}"))).collect());

    let target = attributes.len() - 1;
    let rows = (0..shape.n_rows).map(|r| columns.iter().map(|col| col[r].clone()).collect()).collect();
    Dataset::new(name, attributes, target, rows)
}

/// The planted optimal algorithm for a class count and numeric proportion.
pub fn planted_algorithm(n_classes: usize, numeric_fraction: f64) -> &'static str {
    let few = n_classes <= 3;
    if numeric_fraction >= 1.0 {
        if few {
            "knn"
        } else {
            "logistic_regression"
        }
    } else if numeric_fraction <= 0.0 {
        if few {
            "categorical_nb"
        } else {
            "decision_tree"
        }
    } else if few {
        "random_forest"
    } else {
        "decision_tree"
    }
}

/// Two foreign names for each built-in algorithm, as they might appear in papers.
pub const FOREIGN_NAMES: [(&str, &str); 12] = [
    ("IBk", "knn"),
    ("KNN", "knn"),
    ("NaiveBayes", "gaussian_nb"),
    ("GaussianNB", "gaussian_nb"),
    ("NaiveBayesMultinomial", "categorical_nb"),
    ("CategoricalNB", "categorical_nb"),
    ("J48", "decision_tree"),
    ("CART", "decision_tree"),
    ("RandomForest", "random_forest"),
    ("RF", "random_forest"),
    ("Logistic", "logistic_regression"),
    ("SimpleLogistic", "logistic_regression"),
];

pub fn foreign_aliases() -> AliasMap {
    AliasMap(FOREIGN_NAMES.iter().map(|(f, b)| (f.to_string(), b.to_string())).collect())
}

fn random_shape(rng: &mut SeededRng) -> DatasetShape {
    let n_classes = rng.gen_range(2..=5);
    let (n_numeric, n_categorical) = match rng.gen_range(0..3) {
        0 => (rng.gen_range(2..=6), 0),
        1 => (0, rng.gen_range(2..=6)),
        _ => (rng.gen_range(1..=3), rng.gen_range(1..=3)),
    };
    DatasetShape {
        n_rows: rng.gen_range(30..=60),
        n_classes,
        n_numeric,
        n_categorical,
    }
}

fn shape_truth(shape: &DatasetShape) -> &'static str {
    let n = shape.n_numeric + shape.n_categorical;
    planted_algorithm(shape.n_classes, shape.n_numeric as f64 / n as f64)
}

/// Random datasets paired with their planted optimal algorithm.
pub fn planted_datasets(prefix: &str, n: usize, seed: u64) -> Result<Vec<(Dataset, &'static str)>> {
    let mut rng = rng_from_seed(derive_seed(seed, "planted-shapes"));
    (0..n)
        .map(|i| {
            let shape = random_shape(&mut rng);
            let ds = generate_dataset(&format!("{prefix}{i:03}"), shape, derive_indexed(seed, "planted-data", i as u64))?;
            Ok((ds, shape_truth(&shape)))
        })
        .collect()
}

/// An experience corpus whose acquired knowledge recovers the planted rule.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub store: ExperienceStore,
    pub aliases: AliasMap,
    pub datasets: BTreeMap<String, Dataset>,
    /// Planted built-in algorithm per instance.
    pub truth: BTreeMap<String, String>,
}

/// Paths written by [`PlantedCorpus::write_to`].
#[derive(Debug, Clone)]
pub struct CorpusFiles {
    pub experiences: PathBuf,
    pub registry: PathBuf,
    pub aliases: PathBuf,
}

/// Builds `n_instances` instances. Each is reported by two papers that agree
/// on the best algorithm (under one foreign name) and list five inferior ones.
pub fn planted_corpus(n_instances: usize, seed: u64) -> Result<PlantedCorpus> {
    let papers = vec![
        paper("P1", Level::A, VenueType::Journal, 4.1, 60),
        paper("P2", Level::B, VenueType::Journal, 2.3, 25),
        paper("P3", Level::B, VenueType::Conference, 0.0, 12),
        paper("P4", Level::C, VenueType::Conference, 0.0, 3),
    ];
    let mut rng = rng_from_seed(derive_seed(seed, "planted-corpus"));
    let mut records = Vec::new();
    let mut datasets = BTreeMap::new();
    let mut truth = BTreeMap::new();
    for (ds, planted) in planted_datasets("inst", n_instances, seed)? {
        let id = ds.name().to_string();
        let names: Vec<&str> = FOREIGN_NAMES.iter().filter(|(_, b)| *b == planted).map(|(f, _)| *f).collect();
        let best = names[rng.gen_range(0..names.len())];
        let pool: Vec<&str> = FOREIGN_NAMES.iter().filter(|(_, b)| *b != planted).map(|(f, _)| *f).collect();
        let mut chosen_papers: Vec<&PaperMeta> = papers.iter().collect();
        chosen_papers.shuffle(&mut rng);
        for p in chosen_papers.into_iter().take(2) {
            let others: BTreeSet<String> = pool.choose_multiple(&mut rng, 5).map(|s| s.to_string()).collect();
            records.push(ExperienceRecord {
                paper_id: p.paper_id.clone(),
                instance_id: id.clone(),
                best_algorithm: best.to_string(),
                other_algorithms: others,
            });
        }
        truth.insert(id.clone(), planted.to_string());
        datasets.insert(id, ds);
    }
    Ok(PlantedCorpus {
        store: ExperienceStore::new(papers, records)?,
        aliases: foreign_aliases(),
        datasets,
        truth,
    })
}

fn paper(id: &str, level: Level, venue_type: VenueType, impact_factor: f64, citations: u64) -> PaperMeta {
    PaperMeta {
        paper_id: id.into(),
        level,
        venue_type,
        impact_factor,
        avg_annual_citations: citations,
    }
}

impl PlantedCorpus {
    /// Writes experiences, aliases, one CSV + schema per instance, and a registry with relative paths.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<CorpusFiles> {
        let dir = dir.as_ref();
        let data_dir = dir.join("data");
        std::fs::create_dir_all(&data_dir).map_err(|e| Error::io(&data_dir, e))?;
        let mut instances = serde_json::Map::new();
        for (id, ds) in &self.datasets {
            ds.write_files(data_dir.join(format!("{id}.csv")), data_dir.join(format!("{id}.schema.json")))?;
            instances.insert(
                id.clone(),
                serde_json::json!({"data": format!("data/{id}.csv"), "schema": format!("data/{id}.schema.json")}),
            );
        }
        let files = CorpusFiles {
            experiences: dir.join("experiences.jsonl"),
            registry: dir.join("registry.json"),
            aliases: dir.join("aliases.json"),
        };
        self.store.save(&files.experiences)?;
        let registry = serde_json::json!({ "instances": instances });
        std::fs::write(&files.registry, serde_json::to_string_pretty(&registry)?).map_err(|e| Error::io(&files.registry, e))?;
        std::fs::write(&files.aliases, serde_json::to_string_pretty(&self.aliases)?).map_err(|e| Error::io(&files.aliases, e))?;
        Ok(files)
    }
}
