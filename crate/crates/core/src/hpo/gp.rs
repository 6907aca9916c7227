//! Gaussian-process regression with a squared-exponential kernel.
//!
//! Targets are standardized before fitting; predictions are returned in the
//! original units. The kernel has unit signal variance on the standardized
//! scale, so only the length-scale and the noise variance are free.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct GaussianProcess<T: Scalar> {
    inputs: Vec<Vec<T>>,
    /// Lower Cholesky factor of `K + (noise + jitter) I`, row-major.
    chol: Vec<T>,
    alpha: Vec<T>,
    length_scale: T,
    noise: T,
    jitter: T,
    y_mean: T,
    y_std: T,
    log_marginal_likelihood: T,
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// In-place lower Cholesky factorization; `None` when not positive definite.
fn cholesky<T: Scalar>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn solve_lower<T: Scalar>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

fn solve_upper_transposed<T: Scalar>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

impl<T: Scalar> GaussianProcess<T> {
    /// Fits with fixed hyperparameters. A non-positive-definite kernel matrix
    /// is retried with diagonal jitter from 1e-8 up to 1e-2.
    pub fn fit(inputs: &[Vec<T>], targets: &[T], length_scale: T, noise: T) -> Result<Self> {
        let n = inputs.len();
        if n == 0 {
            return Err(Error::Empty("gaussian process observations"));
        }
        if targets.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: targets.len() });
        }
        let dim = inputs[0].len();
        if let Some(bad) = inputs.iter().find(|x| x.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        if !(length_scale > T::zero()) || noise < T::zero() {
            return Err(Error::Numerical("length-scale must be > 0 and noise >= 0".into()));
        }
        if targets.iter().any(|y| !y.is_finite()) {
            return Err(Error::Numerical("non-finite target".into()));
        }

        let nt = T::from_count(n);
        let y_mean = targets.iter().copied().sum::<T>() / nt;
        let var = targets.iter().map(|&y| (y - y_mean) * (y - y_mean)).sum::<T>() / nt;
        let y_std = if var > T::zero() { var.sqrt() } else { T::one() };
        let y: Vec<T> = targets.iter().map(|&v| (v - y_mean) / y_std).collect();

        let two_l2 = T::lit(2.0) * length_scale * length_scale;
        let mut k = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = (-sq_dist(&inputs[i], &inputs[j]) / two_l2).exp();
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }

        let mut jitter = T::zero();
        let chol = loop {
            let mut a = k.clone();
            for i in 0..n {
                a[i * n + i] += noise + jitter;
            }
            if let Some(l) = cholesky(&a, n) {
                break l;
            }
            jitter = if jitter == T::zero() { T::lit(JITTER_START) } else { jitter * T::lit(10.0) };
            if jitter > T::lit(JITTER_MAX) * T::lit(1.0 + 1e-6) {
                return Err(Error::Numerical("kernel matrix singular even with jitter 1e-2".into()));
            }
        };
        let alpha = solve_upper_transposed(&chol, n, &solve_lower(&chol, n, &y));
        let data_fit = y.iter().zip(&alpha).map(|(&a, &b)| a * b).sum::<T>();
        let log_det = (0..n).map(|i| chol[i * n + i].ln()).sum::<T>();
        let log_marginal_likelihood = T::lit(-0.5) * data_fit - log_det - T::lit(0.5) * nt * T::lit(std::f64::consts::TAU).ln();

        Ok(GaussianProcess {
            inputs: inputs.to_vec(),
            chol,
            alpha,
            length_scale,
            noise,
            jitter,
            y_mean,
            y_std,
            log_marginal_likelihood,
        })
    }

    /// Fits every (length-scale, noise) pair of the grid and keeps the one
    /// with the highest log marginal likelihood; earlier pairs win ties.
    pub fn fit_grid(inputs: &[Vec<T>], targets: &[T], length_scales: &[T], noises: &[T]) -> Result<Self> {
        let mut best: Option<Self> = None;
        let mut last_err = None;
        for &ls in length_scales {
            for &nz in noises {
                match Self::fit(inputs, targets, ls, nz) {
                    Ok(gp) => {
                        if best
                            .as_ref()
                            .map_or(true, |b| gp.log_marginal_likelihood > b.log_marginal_likelihood)
                        {
                            best = Some(gp);
                        }
                    }
                    Err(e) => last_err = Some(e),
                }
            }
        }
        best.ok_or_else(|| last_err.unwrap_or(Error::Empty("hyperparameter grid")))
    }

    pub fn length_scale(&self) -> T {
        self.length_scale
    }

    pub fn noise(&self) -> T {
        self.noise
    }

    pub fn jitter(&self) -> T {
        self.jitter
    }

    pub fn log_marginal_likelihood(&self) -> T {
        self.log_marginal_likelihood
    }

    /// Posterior mean and variance of the latent function, in target units.
    pub fn predict(&self, x: &[T]) -> (T, T) {
        let n = self.inputs.len();
        let two_l2 = T::lit(2.0) * self.length_scale * self.length_scale;
        let ks: Vec<T> = self.inputs.iter().map(|xi| (-sq_dist(xi, x) / two_l2).exp()).collect();
        let mean = ks.iter().zip(&self.alpha).map(|(&a, &b)| a * b).sum::<T>();
        let v = solve_lower(&self.chol, n, &ks);
        let var = (T::one() - v.iter().map(|&a| a * a).sum::<T>()).max(T::zero());
        (self.y_mean + mean * self.y_std, var * self.y_std * self.y_std)
    }

    /// Expected improvement over `best` for maximization.
    pub fn expected_improvement(&self, x: &[T], best: T) -> T {
        let (mean, var) = self.predict(x);
        expected_improvement(mean, var.sqrt(), best)
    }
}

/// Complementary error function; relative error below 1.2e-7.
fn erfc<T: Scalar>(x: T) -> T {
    let z = x.abs();
    let t = T::one() / (T::one() + T::lit(0.5) * z);
    let c = [
        -1.26551223, 1.00002368, 0.37409196, 0.09678418, -0.18628806, 0.27886807, -1.13520398, 1.48851587, -0.82215223,
        0.17087277,
    ];
    let mut poly = T::zero();
    for &ci in c[1..].iter().rev() {
        poly = T::lit(ci) + t * poly;
    }
    let r = t * (-z * z + T::lit(c[0]) + t * poly).exp();
    if x >= T::zero() {
        r
    } else {
        T::lit(2.0) - r
    }
}

/// Standard normal cumulative distribution.
pub fn normal_cdf<T: Scalar>(z: T) -> T {
    T::lit(0.5) * erfc(-z / T::lit(std::f64::consts::SQRT_2))
}

fn normal_pdf<T: Scalar>(z: T) -> T {
    (T::lit(-0.5) * z * z).exp() / T::lit((2.0 * std::f64::consts::PI).sqrt())
}

/// Closed-form EI of a Gaussian posterior `N(mean, sd^2)` over `best`; never negative.
pub fn expected_improvement<T: Scalar>(mean: T, sd: T, best: T) -> T {
    let gain = mean - best;
    if !(sd > T::zero()) {
        return gain.max(T::zero());
    }
    let z = gain / sd;
    (gain * normal_cdf(z) + sd * normal_pdf(z)).max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_matches_known_values() {
        assert!((normal_cdf(0.0f64) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.959964f64) - 0.975).abs() < 1e-6);
        assert!((normal_cdf(-1.0f64) - 0.158_655_253_9).abs() < 1e-7);
    }

    #[test]
    fn interpolates_noiseless_data() {
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 5.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x[0]).sin()).collect();
        let gp = GaussianProcess::fit(&xs, &ys, 0.3, 1e-10).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            let (m, v) = gp.predict(x);
            assert!((m - y).abs() < 1e-4, "{m} vs {y}");
            assert!(v < 1e-4);
        }
    }

    #[test]
    fn duplicate_points_need_jitter() {
        let xs = vec![vec![0.5], vec![0.5], vec![0.5]];
        let gp = GaussianProcess::fit(&xs, &[1.0, 1.0, 1.0], 1.0, 0.0).unwrap();
        assert!(gp.jitter() > 0.0);
    }

    #[test]
    fn constant_targets_are_fine() {
        let xs: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let gp = GaussianProcess::fit_grid(&xs, &[2.0; 4], &[0.1, 1.0], &[1e-6, 1e-2]).unwrap();
        let (m, _) = gp.predict(&[1.5]);
        assert!((m - 2.0).abs() < 1e-6);
    }

    #[test]
    fn ei_is_nonnegative() {
        for &(m, s, b) in &[(0.0, 1.0, 5.0), (-3.0, 1e-9, 0.0), (1.0, 0.0, 2.0), (2.0, 0.5, 1.0)] {
            assert!(expected_improvement::<f64>(m, s, b) >= 0.0);
        }
    }
}
