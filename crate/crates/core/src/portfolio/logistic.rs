use super::encode::{apply_standardizer, standardizer, Encoded};
use super::Classifier;

/// One-vs-rest L2-regularized logistic regression fitted by full-batch gradient descent on z-scored features.
pub struct Logistic {
    scale: Vec<(f64, f64)>,
    /// Per class: bias followed by feature weights.
    weights: Vec<Vec<f64>>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Logistic {
    pub fn fit(data: &Encoded, l2: f64, iterations: usize) -> Self {
        let d = data.n_features();
        let scale = standardizer(&data.rows, d);
        let xs: Vec<Vec<f64>> = data.rows.iter().map(|r| apply_standardizer(r, &scale)).collect();
        let n = xs.len().max(1) as f64;
        // step below 1 / Lipschitz constant of the mean loss gradient
        let max_norm = xs.iter().map(|x| 1.0 + x.iter().map(|v| v * v).sum::<f64>()).fold(1.0, f64::max);
        let step = 1.0 / (0.25 * max_norm + l2);
        let weights = (0..data.n_classes)
            .map(|c| {
                let mut w = vec![0.0; d + 1];
                let mut g = vec![0.0; d + 1];
                for _ in 0..iterations {
                    g.iter_mut().for_each(|v| *v = 0.0);
                    for (x, &y) in xs.iter().zip(&data.labels) {
                        let t = if y == c { 1.0 } else { 0.0 };
                        let z = w[0] + x.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>();
                        let e = (sigmoid(z) - t) / n;
                        g[0] += e;
                        for (gj, xj) in g[1..].iter_mut().zip(x) {
                            *gj += e * xj;
                        }
                    }
                    for j in 1..=d {
                        g[j] += l2 * w[j];
                    }
                    for (wj, gj) in w.iter_mut().zip(&g) {
                        *wj -= step * gj;
                    }
                }
                w
            })
            .collect();
        Logistic { scale, weights }
    }
}

impl Classifier for Logistic {
    fn predict(&self, row: &[f64]) -> usize {
        let x = apply_standardizer(row, &self.scale);
        let mut best = (0, f64::NEG_INFINITY);
        for (c, w) in self.weights.iter().enumerate() {
            let z = w[0] + x.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>();
            if z > best.1 {
                best = (c, z);
            }
        }
        best.0
    }
}
