use crate::dataset::{Column, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    /// Codes `0..levels` stored as whole numbers.
    Categorical { levels: usize },
}

/// Row-major design matrix of a dataset's common attributes plus class codes.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub kinds: Vec<FeatureKind>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Encoded {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let common: Vec<usize> = ds.common_indices().collect();
        let kinds = common
            .iter()
            .map(|&i| match ds.column(i) {
                Column::Numeric(_) => FeatureKind::Numeric,
                Column::Categorical { levels, .. } => FeatureKind::Categorical { levels: levels.len() },
            })
            .collect();
        let rows = (0..ds.n_rows())
            .map(|r| {
                common
                    .iter()
                    .map(|&i| match ds.column(i) {
                        Column::Numeric(v) => v[r],
                        Column::Categorical { codes, .. } => f64::from(codes[r]),
                    })
                    .collect()
            })
            .collect();
        Encoded {
            kinds,
            rows,
            labels: ds.target_codes().iter().map(|&c| c as usize).collect(),
            n_classes: ds.n_classes(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.kinds.len()
    }

    pub fn subset(&self, idx: &[usize]) -> Encoded {
        Encoded {
            kinds: self.kinds.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &y in &self.labels {
            c[y] += 1;
        }
        c
    }
}

/// Most frequent class; ties go to the lowest class index.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Per-feature (mean, std) with zero std replaced by one.
pub(crate) fn standardizer(rows: &[Vec<f64>], d: usize) -> Vec<(f64, f64)> {
    let n = rows.len().max(1) as f64;
    (0..d)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            (mean, if sd > 1e-12 { sd } else { 1.0 })
        })
        .collect()
}

pub(crate) fn apply_standardizer(row: &[f64], s: &[(f64, f64)]) -> Vec<f64> {
    row.iter().zip(s).map(|(x, (m, sd))| (x - m) / sd).collect()
}
