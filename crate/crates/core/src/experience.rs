//! Paper experiences: ingestion, validation, reliability ranking and persistence.
//!
//! The experience file is JSON Lines with two record kinds discriminated by
//! a `kind` field:
//!
//! ```text
//! {"kind":"paper","paper_id":"G3","level":"A","venue_type":"Journal","impact_factor":3.2,"avg_annual_citations":41}
//! {"kind":"experience","paper_id":"G3","instance_id":"wine","best_algorithm":"J48","other_algorithms":["IBk","LDA"]}
//! ```

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Paper level, `A` most reliable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    A,
    B,
    C,
    D,
}

impl Level {
    fn reliability(self) -> u8 {
        match self {
            Level::A => 3,
            Level::B => 2,
            Level::C => 1,
            Level::D => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VenueType {
    Journal,
    Conference,
}

impl VenueType {
    fn reliability(self) -> u8 {
        match self {
            VenueType::Journal => 1,
            VenueType::Conference => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperMeta {
    pub paper_id: String,
    pub level: Level,
    pub venue_type: VenueType,
    #[serde(default)]
    pub impact_factor: f64,
    #[serde(default)]
    pub avg_annual_citations: u64,
}

impl PaperMeta {
    /// Compares reliability by level, then venue type, then impact factor,
    /// then citations. `Greater` means more reliable.
    pub fn cmp_reliability(&self, other: &PaperMeta) -> Ordering {
        self.level
            .reliability()
            .cmp(&other.level.reliability())
            .then(self.venue_type.reliability().cmp(&other.venue_type.reliability()))
            .then(self.impact_factor.total_cmp(&other.impact_factor))
            .then(self.avg_annual_citations.cmp(&other.avg_annual_citations))
    }

    fn validate(&self) -> Result<()> {
        if !self.impact_factor.is_finite() || self.impact_factor < 0.0 {
            return Err(Error::range(
                format!("{}.impact_factor", self.paper_id),
                self.impact_factor,
                "finite and >= 0",
            ));
        }
        Ok(())
    }
}

/// One paper-reported comparison on one dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperienceRecord {
    pub paper_id: String,
    pub instance_id: String,
    pub best_algorithm: String,
    pub other_algorithms: BTreeSet<String>,
}

impl ExperienceRecord {
    pub fn validate(&self) -> Result<()> {
        if self.other_algorithms.is_empty() {
            return Err(Error::Invariant(format!(
                "experience ({}, {}) lists no inferior algorithms",
                self.paper_id, self.instance_id
            )));
        }
        if self.other_algorithms.contains(&self.best_algorithm) {
            return Err(Error::Invariant(format!(
                "experience ({}, {}) lists best algorithm `{}` among the inferior ones",
                self.paper_id, self.instance_id, self.best_algorithm
            )));
        }
        Ok(())
    }

    /// Every algorithm the record mentions.
    pub fn algorithms(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.best_algorithm.as_str()).chain(self.other_algorithms.iter().map(String::as_str))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum Line {
    Paper(PaperMeta),
    Experience(ExperienceRecord),
}

/// Synonym table applied to algorithm names at ingestion, e.g. `"SVM" -> "LibSVM"`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AliasMap(pub BTreeMap<String, String>);

impl AliasMap {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    pub fn resolve<'a>(&'a self, name: &'a str) -> &'a str {
        self.0.get(name).map(String::as_str).unwrap_or(name)
    }
}

/// Validated papers and experiences. Read-only after construction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperienceStore {
    papers: BTreeMap<String, PaperMeta>,
    records: Vec<ExperienceRecord>,
}

impl ExperienceStore {
    /// Builds a store, enforcing every invariant.
    pub fn new(papers: Vec<PaperMeta>, records: Vec<ExperienceRecord>) -> Result<Self> {
        let mut store = ExperienceStore::default();
        for p in papers {
            store.insert_paper(p)?;
        }
        for (i, r) in records.into_iter().enumerate() {
            store.insert_record(r, i + 1)?;
        }
        Ok(store)
    }

    fn insert_paper(&mut self, paper: PaperMeta) -> Result<()> {
        paper.validate()?;
        if self.papers.contains_key(&paper.paper_id) {
            return Err(Error::DuplicatePaper(paper.paper_id));
        }
        self.papers.insert(paper.paper_id.clone(), paper);
        Ok(())
    }

    fn insert_record(&mut self, record: ExperienceRecord, line: usize) -> Result<()> {
        record.validate()?;
        if !self.papers.contains_key(&record.paper_id) {
            return Err(Error::UnknownPaper {
                paper_id: record.paper_id,
                line,
            });
        }
        self.records.push(record);
        Ok(())
    }

    pub fn papers(&self) -> impl Iterator<Item = &PaperMeta> {
        self.papers.values()
    }

    pub fn paper(&self, id: &str) -> Option<&PaperMeta> {
        self.papers.get(id)
    }

    pub fn records(&self) -> &[ExperienceRecord] {
        &self.records
    }

    pub fn paper_count(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records grouped by instance id, instances in ascending order.
    pub fn by_instance(&self) -> BTreeMap<&str, Vec<&ExperienceRecord>> {
        let mut out: BTreeMap<&str, Vec<&ExperienceRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.instance_id.as_str()).or_default().push(r);
        }
        out
    }

    /// Parses the JSON-Lines format. Paper lines may appear after the
    /// experiences that cite them; references are checked once the whole
    /// input is read.
    pub fn from_reader(reader: impl BufRead, aliases: Option<&AliasMap>) -> Result<Self> {
        let mut papers = Vec::new();
        let mut records = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            match parsed {
                Line::Paper(p) => papers.push(p),
                Line::Experience(r) => {
                    r.validate()?;
                    let r = match aliases {
                        Some(a) => apply_aliases(r, a)?,
                        None => r,
                    };
                    records.push((lineno, r));
                }
            }
        }
        let mut store = ExperienceStore::default();
        for p in papers {
            store.insert_paper(p)?;
        }
        for (lineno, r) in records {
            store.insert_record(r, lineno)?;
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        for p in self.papers.values() {
            serde_json::to_writer(&mut *w, &Line::Paper(p.clone()))?;
            writeln!(w)?;
        }
        for r in &self.records {
            serde_json::to_writer(&mut *w, &Line::Experience(r.clone()))?;
            writeln!(w)?;
        }
        Ok(())
    }
}

fn apply_aliases(mut r: ExperienceRecord, aliases: &AliasMap) -> Result<ExperienceRecord> {
    r.best_algorithm = aliases.resolve(&r.best_algorithm).to_string();
    let others: BTreeSet<String> = r
        .other_algorithms
        .iter()
        .map(|a| aliases.resolve(a).to_string())
        .filter(|a| *a != r.best_algorithm)
        .collect();
    r.other_algorithms = others;
    if r.other_algorithms.is_empty() {
        return Err(Error::Invariant(format!(
            "experience ({}, {}) has no inferior algorithms left after alias mapping",
            r.paper_id, r.instance_id
        )));
    }
    Ok(r)
}

/// Reads an experience file.
pub fn load_experiences(path: impl AsRef<Path>) -> Result<ExperienceStore> {
    load_experiences_with_aliases(path, None)
}

pub fn load_experiences_with_aliases(path: impl AsRef<Path>, aliases: Option<&AliasMap>) -> Result<ExperienceStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ExperienceStore::from_reader(BufReader::new(file), aliases)
}

/// Papers in ascending order of reliability. A paper's position is the
/// weight it lends to the relations it supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliabilityRank {
    ordering: Vec<String>,
    index: HashMap<String, usize>,
}

impl ReliabilityRank {
    pub fn ordering(&self) -> &[String] {
        &self.ordering
    }

    pub fn rank_of(&self, paper_id: &str) -> Option<usize> {
        self.index.get(paper_id).copied()
    }

    pub fn len(&self) -> usize {
        self.ordering.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordering.is_empty()
    }
}

/// Orders papers least reliable first; exact ties fall back to `paper_id`.
pub fn rank_papers<'a>(papers: impl IntoIterator<Item = &'a PaperMeta>) -> Result<ReliabilityRank> {
    let mut sorted: Vec<&PaperMeta> = papers.into_iter().collect();
    if sorted.is_empty() {
        return Err(Error::Empty("no papers to rank"));
    }
    sorted.sort_by(|a, b| a.cmp_reliability(b).then_with(|| a.paper_id.cmp(&b.paper_id)));
    let ordering: Vec<String> = sorted.iter().map(|p| p.paper_id.clone()).collect();
    let index = ordering.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    Ok(ReliabilityRank { ordering, index })
}
