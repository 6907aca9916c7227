use super::encode::{FeatureKind, Encoded};
use super::Classifier;

fn log_priors(data: &Encoded) -> Vec<f64> {
    let n = data.n_rows() as f64;
    // Laplace-smoothed so a class absent from a fold stays finite
    data.class_counts()
        .iter()
        .map(|&c| ((c as f64 + 1.0) / (n + data.n_classes as f64)).ln())
        .collect()
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Gaussian naive Bayes; variances are inflated by `smoothing` times the largest feature variance.
pub struct GaussianNb {
    log_prior: Vec<f64>,
    /// Per class, per feature (mean, variance).
    params: Vec<Vec<(f64, f64)>>,
}

impl GaussianNb {
    pub fn fit(data: &Encoded, smoothing: f64) -> Self {
        let d = data.n_features();
        let n = data.n_rows().max(1) as f64;
        let max_var = (0..d)
            .map(|j| {
                let m = data.rows.iter().map(|r| r[j]).sum::<f64>() / n;
                data.rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n
            })
            .fold(0.0, f64::max);
        let eps = (smoothing * max_var).max(1e-300);
        let params = (0..data.n_classes)
            .map(|c| {
                let members: Vec<&Vec<f64>> = data.rows.iter().zip(&data.labels).filter(|(_, &y)| y == c).map(|(r, _)| r).collect();
                let nc = members.len().max(1) as f64;
                (0..d)
                    .map(|j| {
                        let m = members.iter().map(|r| r[j]).sum::<f64>() / nc;
                        let v = members.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / nc;
                        (m, v + eps)
                    })
                    .collect()
            })
            .collect();
        GaussianNb {
            log_prior: log_priors(data),
            params,
        }
    }
}

impl Classifier for GaussianNb {
    fn predict(&self, row: &[f64]) -> usize {
        let scores: Vec<f64> = self
            .params
            .iter()
            .zip(&self.log_prior)
            .map(|(p, &lp)| {
                lp + row
                    .iter()
                    .zip(p)
                    .map(|(&x, &(m, v))| -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m).powi(2) / v))
                    .sum::<f64>()
            })
            .collect();
        argmax(&scores)
    }
}

/// Categorical naive Bayes with additive (Laplace) smoothing `alpha`.
pub struct CategoricalNb {
    log_prior: Vec<f64>,
    /// Per class, per feature, per level log-probability.
    log_prob: Vec<Vec<Vec<f64>>>,
}

impl CategoricalNb {
    pub fn fit(data: &Encoded, alpha: f64) -> Self {
        let levels: Vec<usize> = data
            .kinds
            .iter()
            .map(|k| match k {
                FeatureKind::Categorical { levels } => *levels,
                FeatureKind::Numeric => 1,
            })
            .collect();
        let log_prob = (0..data.n_classes)
            .map(|c| {
                let members: Vec<&Vec<f64>> = data.rows.iter().zip(&data.labels).filter(|(_, &y)| y == c).map(|(r, _)| r).collect();
                levels
                    .iter()
                    .enumerate()
                    .map(|(j, &l)| {
                        let mut counts = vec![0usize; l];
                        for r in &members {
                            counts[(r[j] as usize).min(l - 1)] += 1;
                        }
                        let denom = members.len() as f64 + alpha * l as f64;
                        counts.iter().map(|&k| ((k as f64 + alpha) / denom).ln()).collect()
                    })
                    .collect()
            })
            .collect();
        CategoricalNb {
            log_prior: log_priors(data),
            log_prob,
        }
    }
}

impl Classifier for CategoricalNb {
    fn predict(&self, row: &[f64]) -> usize {
        let scores: Vec<f64> = self
            .log_prob
            .iter()
            .zip(&self.log_prior)
            .map(|(lp, &prior)| {
                prior
                    + row
                        .iter()
                        .zip(lp)
                        .map(|(&x, table)| table[(x as usize).min(table.len() - 1)])
                        .sum::<f64>()
            })
            .collect();
        argmax(&scores)
    }
}
