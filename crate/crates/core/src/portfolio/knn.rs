use super::encode::{apply_standardizer, majority, standardizer, Encoded};
use super::Classifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Euclidean,
    Manhattan,
}

/// k-nearest neighbours on z-scored features.
pub struct Knn {
    k: usize,
    distance: Distance,
    scale: Vec<(f64, f64)>,
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl Knn {
    pub fn fit(data: &Encoded, k: usize, distance: Distance) -> Self {
        let scale = standardizer(&data.rows, data.n_features());
        Knn {
            k: k.clamp(1, data.n_rows().max(1)),
            distance,
            rows: data.rows.iter().map(|r| apply_standardizer(r, &scale)).collect(),
            scale,
            labels: data.labels.clone(),
            n_classes: data.n_classes,
        }
    }

    fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.distance {
            Distance::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            Distance::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

impl Classifier for Knn {
    fn predict(&self, row: &[f64]) -> usize {
        let q = apply_standardizer(row, &self.scale);
        let mut d: Vec<(f64, usize)> = self.rows.iter().enumerate().map(|(i, r)| (self.dist(&q, r), i)).collect();
        // training order breaks distance ties
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0; self.n_classes];
        for &(_, i) in d.iter().take(self.k) {
            votes[self.labels[i]] += 1;
        }
        majority(&votes)
    }
}
