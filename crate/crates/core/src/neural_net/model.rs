use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::config::{Activation, MlpConfig, OutputMode, TrainOptions};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

/// A dense layer. `weights` is `fan_in x fan_out`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T: Scalar> {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct LayerRepr<T: Scalar> {
    weights: Vec<Vec<T>>,
    biases: Vec<T>,
}

impl<T: Scalar> From<Layer<T>> for LayerRepr<T> {
    fn from(l: Layer<T>) -> Self {
        LayerRepr {
            weights: l.weights.chunks(l.fan_out).map(<[T]>::to_vec).collect(),
            biases: l.biases,
        }
    }
}

impl<T: Scalar> TryFrom<LayerRepr<T>> for Layer<T> {
    type Error = String;

    fn try_from(r: LayerRepr<T>) -> std::result::Result<Self, String> {
        let fan_out = r.biases.len();
        if fan_out == 0 || r.weights.iter().any(|row| row.len() != fan_out) {
            return Err("ragged layer weights".into());
        }
        Ok(Layer {
            fan_in: r.weights.len(),
            fan_out,
            weights: r.weights.into_iter().flatten().collect(),
            biases: r.biases,
        })
    }
}

impl<T: Scalar> Serialize for Layer<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LayerRepr::from(self.clone()).serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Layer<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = LayerRepr::<T>::deserialize(d)?;
        Layer::try_from(repr).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MlpModel<T: Scalar> {
    pub config: MlpConfig,
    pub input_dim: usize,
    pub output_dim: usize,
    pub output_mode: OutputMode,
    pub seed: u64,
    #[serde(default)]
    pub options: TrainOptions,
    pub layers: Vec<Layer<T>>,
}

/// Per-layer gradients, same shapes as the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T: Scalar> {
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub(crate) fn zeros_like(model: &MlpModel<T>) -> Self {
        Gradients {
            weights: model.layers.iter().map(|l| vec![T::zero(); l.weights.len()]).collect(),
            biases: model.layers.iter().map(|l| vec![T::zero(); l.biases.len()]).collect(),
        }
    }

    /// Flattened in the same order as [`MlpModel::parameters`].
    pub fn flatten(&self) -> Vec<T> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }
}

#[inline]
fn activate<T: Scalar>(a: Activation, z: T) -> T {
    match a {
        Activation::Relu => z.max(T::zero()),
        Activation::Tanh => z.tanh(),
        Activation::Logistic => T::one() / (T::one() + (-z).exp()),
        Activation::Identity => z,
    }
}

/// Derivative expressed through the pre-activation `z` and the output `h`.
#[inline]
fn activate_prime<T: Scalar>(a: Activation, z: T, h: T) -> T {
    match a {
        Activation::Relu => {
            if z > T::zero() {
                T::one()
            } else {
                T::zero()
            }
        }
        Activation::Tanh => T::one() - h * h,
        Activation::Logistic => h * (T::one() - h),
        Activation::Identity => T::one(),
    }
}

fn softmax_in_place<T: Scalar>(v: &mut [T]) {
    let max = v.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

impl<T: Scalar> MlpModel<T> {
    /// Creates a model with weights drawn from `U[-s, s]`,
    /// `s = sqrt(6 / (fan_in + fan_out))`, and zero biases.
    pub fn init(config: MlpConfig, input_dim: usize, output_dim: usize, output_mode: OutputMode, seed: u64) -> Result<Self> {
        Self::init_with_options(config, TrainOptions::default(), input_dim, output_dim, output_mode, seed)
    }

    pub fn init_with_options(
        config: MlpConfig,
        options: TrainOptions,
        input_dim: usize,
        output_dim: usize,
        output_mode: OutputMode,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        options.validate()?;
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::range("dims", format!("{input_dim}x{output_dim}"), ">= 1"));
        }
        let mut model = MlpModel {
            config,
            input_dim,
            output_dim,
            output_mode,
            seed,
            options,
            layers: Vec::new(),
        };
        model.reinitialize();
        Ok(model)
    }

    /// Redraws every weight from the model's seed.
    pub(crate) fn reinitialize(&mut self) {
        let mut rng = rng_from_seed(self.seed);
        let mut dims = vec![self.input_dim];
        dims.extend(std::iter::repeat(self.config.hidden_layer_size).take(self.config.hidden_layers));
        dims.push(self.output_dim);
        self.layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = (0..fan_in * fan_out).map(|_| T::lit(rng.gen_range(-s..=s))).collect();
                Layer {
                    fan_in,
                    fan_out,
                    weights,
                    biases: vec![T::zero(); fan_out],
                }
            })
            .collect();
    }

    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.fan_in, l.fan_out)).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// All weights and biases, layer by layer (weights first).
    pub fn parameters(&self) -> Vec<T> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[T]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                got: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = it.next().unwrap();
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|w| w.is_finite()))
    }

    /// Forward pass keeping every layer's pre-activations and outputs.
    /// `outs[0]` is the input; `outs[k+1]` the output of layer `k`.
    fn forward_trace(&self, input: &[T]) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
        let n_layers = self.layers.len();
        let mut pre = Vec::with_capacity(n_layers);
        let mut outs = Vec::with_capacity(n_layers + 1);
        outs.push(input.to_vec());
        for (k, layer) in self.layers.iter().enumerate() {
            let a = &outs[k];
            let mut z = layer.biases.clone();
            for (i, &ai) in a.iter().enumerate() {
                if ai == T::zero() {
                    continue;
                }
                let row = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                for (zj, &w) in z.iter_mut().zip(row) {
                    *zj += ai * w;
                }
            }
            let h: Vec<T> = if k + 1 == n_layers {
                let mut h = z.clone();
                if self.output_mode == OutputMode::Classifier {
                    softmax_in_place(&mut h);
                }
                h
            } else {
                z.iter().map(|&zj| activate(self.config.activation, zj)).collect()
            };
            pre.push(z);
            outs.push(h);
        }
        (pre, outs)
    }

    fn check_input(&self, input: &[T]) -> Result<()> {
        if input.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: input.len(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, input: &[T]) -> Result<Vec<T>> {
        self.check_input(input)?;
        Ok(self.forward_trace(input).1.pop().unwrap())
    }

    /// Per-row loss: cross-entropy for classifiers, `0.5 * sum (y - t)^2` for regressors.
    fn row_loss(&self, output: &[T], target: &[T]) -> T {
        match self.output_mode {
            OutputMode::Classifier => {
                let floor = T::min_positive_value();
                output
                    .iter()
                    .zip(target)
                    .filter(|(_, &t)| t != T::zero())
                    .map(|(&p, &t)| -t * p.max(floor).ln())
                    .sum()
            }
            OutputMode::Regressor => {
                let half = T::lit(0.5);
                output.iter().zip(target).map(|(&y, &t)| half * (y - t) * (y - t)).sum()
            }
        }
    }

    pub(crate) fn check_batch(&self, inputs: &[Vec<T>], targets: &[Vec<T>]) -> Result<()> {
        if inputs.is_empty() {
            return Err(Error::Empty("batch"));
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        for (x, t) in inputs.iter().zip(targets) {
            self.check_input(x)?;
            if t.len() != self.output_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.output_dim,
                    got: t.len(),
                });
            }
        }
        Ok(())
    }

    /// Mean loss over a batch.
    pub fn loss(&self, inputs: &[Vec<T>], targets: &[Vec<T>]) -> Result<T> {
        self.check_batch(inputs, targets)?;
        Ok(self.loss_unchecked(inputs.iter().zip(targets)))
    }

    pub(crate) fn loss_unchecked<'a>(&self, rows: impl ExactSizeIterator<Item = (&'a Vec<T>, &'a Vec<T>)>) -> T {
        let n = T::from_count(rows.len());
        rows.map(|(x, t)| {
            let out = self.forward_trace(x).1.pop().unwrap();
            self.row_loss(&out, t)
        })
        .sum::<T>()
            / n
    }

    /// Mean loss and its exact gradient over a batch.
    pub fn gradient(&self, inputs: &[Vec<T>], targets: &[Vec<T>]) -> Result<(T, Gradients<T>)> {
        self.check_batch(inputs, targets)?;
        Ok(self.gradient_unchecked(inputs.iter().zip(targets)))
    }

    pub(crate) fn gradient_unchecked<'a>(&self, rows: impl ExactSizeIterator<Item = (&'a Vec<T>, &'a Vec<T>)>) -> (T, Gradients<T>) {
        let n = rows.len();
        let scale = T::one() / T::from_count(n);
        let mut grads = Gradients::zeros_like(self);
        let mut total = T::zero();
        let last = self.layers.len() - 1;
        for (x, t) in rows {
            let (pre, outs) = self.forward_trace(x);
            total += self.row_loss(&outs[last + 1], t);
            // Softmax + cross-entropy and identity + half squared error share dL/dz = y - t.
            let mut delta: Vec<T> = outs[last + 1].iter().zip(t).map(|(&y, &tt)| (y - tt) * scale).collect();
            for k in (0..=last).rev() {
                let layer = &self.layers[k];
                let a = &outs[k];
                let gw = &mut grads.weights[k];
                for (i, &ai) in a.iter().enumerate() {
                    if ai == T::zero() {
                        continue;
                    }
                    let row = &mut gw[i * layer.fan_out..(i + 1) * layer.fan_out];
                    for (g, &d) in row.iter_mut().zip(&delta) {
                        *g += ai * d;
                    }
                }
                for (g, &d) in grads.biases[k].iter_mut().zip(&delta) {
                    *g += d;
                }
                if k > 0 {
                    let mut prev = vec![T::zero(); layer.fan_in];
                    for (i, p) in prev.iter_mut().enumerate() {
                        let row = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                        let s: T = row.iter().zip(&delta).map(|(&w, &d)| w * d).sum();
                        *p = s * activate_prime(self.config.activation, pre[k - 1][i], outs[k][i]);
                    }
                    delta = prev;
                }
            }
        }
        (total * scale, grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(hidden_layers: usize, size: usize) -> MlpConfig {
        MlpConfig {
            hidden_layers,
            hidden_layer_size: size,
            ..MlpConfig::default()
        }
    }

    #[test]
    fn shapes_chain() {
        let m = MlpModel::<f64>::init(cfg(1, 5), 3, 2, OutputMode::Classifier, 1).unwrap();
        assert_eq!(m.layer_shapes(), vec![(3, 5), (5, 2)]);
        let m = MlpModel::<f64>::init(cfg(3, 7), 4, 1, OutputMode::Regressor, 1).unwrap();
        assert_eq!(m.layer_shapes(), vec![(4, 7), (7, 7), (7, 7), (7, 1)]);
    }

    #[test]
    fn init_is_seed_deterministic_and_bounded() {
        let a = MlpModel::<f64>::init(cfg(2, 10), 3, 2, OutputMode::Regressor, 9).unwrap();
        let b = MlpModel::<f64>::init(cfg(2, 10), 3, 2, OutputMode::Regressor, 9).unwrap();
        let c = MlpModel::<f64>::init(cfg(2, 10), 3, 2, OutputMode::Regressor, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for l in &a.layers {
            let s = (6.0 / (l.fan_in + l.fan_out) as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() <= s));
            assert!(l.biases.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn out_of_range_config_rejected() {
        assert!(MlpModel::<f64>::init(cfg(21, 10), 3, 2, OutputMode::Regressor, 1).is_err());
        assert!(MlpModel::<f64>::init(cfg(1, 10), 0, 2, OutputMode::Regressor, 1).is_err());
    }

    #[test]
    fn classifier_outputs_are_a_distribution() {
        let m = MlpModel::<f64>::init(cfg(2, 8), 3, 4, OutputMode::Classifier, 3).unwrap();
        for x in [[0.0, 0.0, 0.0], [10.0, -3.0, 2.0], [-100.0, 50.0, 7.0]] {
            let p = m.predict(&x).unwrap();
            assert!(p.iter().all(|&v| v >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_weight_regressor_predicts_zero() {
        let mut m = MlpModel::<f64>::init(cfg(1, 5), 3, 2, OutputMode::Regressor, 3).unwrap();
        let zeros = vec![0.0; m.parameter_count()];
        m.set_parameters(&zeros).unwrap();
        assert_eq!(m.predict(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let m = MlpModel::<f64>::init(cfg(1, 5), 3, 2, OutputMode::Regressor, 3).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dead_relu_input_gives_zero_first_layer_gradient() {
        let m = MlpModel::<f64>::init(
            MlpConfig {
                activation: Activation::Relu,
                ..cfg(1, 6)
            },
            3,
            2,
            OutputMode::Regressor,
            5,
        )
        .unwrap();
        let (_, g) = m.gradient(&[vec![0.0; 3]], &[vec![1.0, -1.0]]).unwrap();
        assert!(g.weights[0].iter().all(|&w| w == 0.0));
    }

    #[test]
    fn duplicated_row_leaves_mean_gradient_unchanged() {
        let m = MlpModel::<f64>::init(
            MlpConfig {
                activation: Activation::Tanh,
                ..cfg(2, 6)
            },
            3,
            2,
            OutputMode::Classifier,
            5,
        )
        .unwrap();
        let x = vec![0.3, -0.2, 1.1];
        let t = vec![0.0, 1.0];
        let (l1, g1) = m.gradient(&[x.clone()], &[t.clone()]).unwrap();
        let (l2, g2) = m.gradient(&[x.clone(), x], &[t.clone(), t]).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
        for (a, b) in g1.flatten().iter().zip(g2.flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip_preserves_predictions() {
        let m = MlpModel::<f64>::init(cfg(2, 9), 4, 3, OutputMode::Regressor, 11).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: MlpModel<f64> = serde_json::from_str(&json).unwrap();
        let x = [0.1, -0.7, 2.0, 0.0];
        let (a, b) = (m.predict(&x).unwrap(), back.predict(&x).unwrap());
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-9);
        }
    }
}
