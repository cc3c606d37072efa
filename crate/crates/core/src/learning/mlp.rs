//! Fully connected network: ReLU hidden layers, linear output, with the input
//! and target normalizers it was trained with.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Encoding, Role};
use super::normalize::Normalizer;
use crate::error::{Error, Result};
use crate::kinematics::DOF;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    /// Per layer, row-major `out x in`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub input_normalizer: Normalizer,
    pub target_normalizer: Normalizer,
    pub encoding: Encoding,
    pub role: Role,
    pub seed: u64,
}

/// Gradients (or any per-parameter quantity) shaped like a model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Params {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Self {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.biases).flatten()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.biases.iter_mut()).flatten()
    }
}

impl MlpModel {
    /// Uniform He initialization `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))` for
    /// hidden layers; the output layer and all biases start at zero, so an
    /// untrained model predicts the target mean. Identity normalizers.
    pub fn new_random(layer_sizes: &[usize], encoding: Encoding, role: Role, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(layer_sizes, encoding, role, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = model.weights.len() - 1;
        for (l, w) in model.weights.iter_mut().enumerate().take(hidden) {
            let limit = (6.0 / layer_sizes[l] as f64).sqrt();
            w.iter_mut().for_each(|v| *v = rng.random_range(-limit..limit));
        }
        Ok(model)
    }

    pub fn zeros(layer_sizes: &[usize], encoding: Encoding, role: Role, seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "invalid layer sizes {layer_sizes:?}"
            )));
        }
        let model = Self {
            layer_sizes: layer_sizes.to_vec(),
            weights: layer_sizes
                .windows(2)
                .map(|w| vec![0.0; w[0] * w[1]])
                .collect(),
            biases: layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
            input_normalizer: Normalizer::identity(layer_sizes[0]),
            target_normalizer: Normalizer::identity(*layer_sizes.last().unwrap()),
            encoding,
            role,
            seed,
        };
        Ok(model)
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_sizes.last().expect("non-empty")
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn num_parameters(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.layer_sizes.len() < 2 {
            return bad("model needs at least one layer".into());
        }
        if self.output_width() != DOF {
            return bad(format!("output width {} != {DOF}", self.output_width()));
        }
        if self.input_width() != self.encoding.width() {
            return bad(format!(
                "input width {} does not match {} encoding",
                self.input_width(),
                self.encoding
            ));
        }
        if self.weights.len() != self.layer_sizes.len() - 1 || self.biases.len() != self.weights.len() {
            return bad("layer count mismatch".into());
        }
        for (l, w) in self.layer_sizes.windows(2).enumerate() {
            if self.weights[l].len() != w[0] * w[1] || self.biases[l].len() != w[1] {
                return bad(format!("layer {l} parameter shapes inconsistent"));
            }
        }
        if self.input_normalizer.width() != self.input_width()
            || self.target_normalizer.width() != self.output_width()
        {
            return bad("normalizer widths inconsistent".into());
        }
        if !self.params_finite() {
            return bad("non-finite parameters".into());
        }
        Ok(())
    }

    fn params_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.biases)
            .flatten()
            .chain(&self.input_normalizer.mean)
            .chain(&self.input_normalizer.std)
            .chain(&self.target_normalizer.mean)
            .chain(&self.target_normalizer.std)
            .all(|v| v.is_finite())
    }

    /// Network output for an already-normalized input.
    pub fn forward_normalized(&self, x: &[f64]) -> Vec<f64> {
        let mut act = x.to_vec();
        let last = self.num_layers() - 1;
        for l in 0..self.num_layers() {
            act = self.layer(l, &act, l < last);
        }
        act
    }

    fn layer(&self, l: usize, input: &[f64], relu: bool) -> Vec<f64> {
        let n_in = self.layer_sizes[l];
        let w = &self.weights[l];
        self.biases[l]
            .iter()
            .enumerate()
            .map(|(o, b)| {
                let row = &w[o * n_in..(o + 1) * n_in];
                let z = b + row.iter().zip(input).map(|(a, x)| a * x).sum::<f64>();
                if relu {
                    z.max(0.0)
                } else {
                    z
                }
            })
            .collect()
    }

    /// Joint offsets predicted for a raw feature vector.
    pub fn predict(&self, features: &[f64]) -> Result<[f64; DOF]> {
        if features.len() != self.input_width() {
            return Err(Error::WidthMismatch {
                got: features.len(),
                expected: self.input_width(),
            });
        }
        let z = self.forward_normalized(&self.input_normalizer.normalize(features));
        let y = self.target_normalizer.denormalize(&z);
        let mut out = [0.0; DOF];
        out.copy_from_slice(&y[..DOF]);
        Ok(out)
    }

    /// Mean squared error over a batch of normalized samples and its gradient
    /// with respect to every parameter. The mean runs over samples and
    /// outputs.
    pub fn loss_and_gradients<X: AsRef<[f64]>, T: AsRef<[f64]>>(
        &self,
        inputs: &[X],
        targets: &[T],
        grads: &mut Params,
    ) -> f64 {
        grads.iter_mut().for_each(|g| *g = 0.0);
        let n_layers = self.num_layers();
        let scale = 1.0 / (inputs.len() * self.output_width()) as f64;
        let mut loss = 0.0;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        for (x, t) in inputs.iter().zip(targets) {
            acts.clear();
            acts.push(x.as_ref().to_vec());
            for l in 0..n_layers {
                let next = self.layer(l, &acts[l], l + 1 < n_layers);
                acts.push(next);
            }
            let out = &acts[n_layers];
            let mut delta: Vec<f64> = out
                .iter()
                .zip(t.as_ref())
                .map(|(y, t)| {
                    loss += (y - t) * (y - t);
                    2.0 * (y - t) * scale
                })
                .collect();
            for l in (0..n_layers).rev() {
                let n_in = self.layer_sizes[l];
                let input = &acts[l];
                let gw = &mut grads.weights[l];
                for (o, d) in delta.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    grads.biases[l][o] += d;
                    let row = &mut gw[o * n_in..(o + 1) * n_in];
                    row.iter_mut().zip(input).for_each(|(g, x)| *g += d * x);
                }
                if l == 0 {
                    break;
                }
                let w = &self.weights[l];
                delta = (0..n_in)
                    .map(|i| {
                        if input[i] <= 0.0 {
                            // ReLU of the previous layer was inactive
                            return 0.0;
                        }
                        delta
                            .iter()
                            .enumerate()
                            .map(|(o, d)| d * w[o * n_in + i])
                            .sum()
                    })
                    .collect();
            }
        }
        loss * scale
    }

    /// Mean squared error of normalized predictions.
    pub fn mse<X: AsRef<[f64]>, T: AsRef<[f64]>>(&self, inputs: &[X], targets: &[T]) -> f64 {
        if inputs.is_empty() {
            return 0.0;
        }
        let mut sum = 0.0;
        for (x, t) in inputs.iter().zip(targets) {
            let y = self.forward_normalized(x.as_ref());
            sum += y
                .iter()
                .zip(t.as_ref())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        sum / (inputs.len() * self.output_width()) as f64
    }

    /// Weights then biases, layer by layer.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.biases.iter_mut()).flatten()
    }
}

/// Denormalized prediction of joint offsets.
pub fn mlp_forward(model: &MlpModel, input: &[f64]) -> Result<[f64; DOF]> {
    model.predict(input)
}

/// Compares backpropagated gradients against central finite differences
/// (step `1e-5`) over every parameter and returns the largest relative error
/// `|g - n| / max(|g|, |n|, 1e-6)`.
pub fn grad_check<X: AsRef<[f64]>, T: AsRef<[f64]>>(
    model: &MlpModel,
    inputs: &[X],
    targets: &[T],
) -> f64 {
    const H: f64 = 1e-5;
    let mut analytic = Params::zeros_like(model);
    model.loss_and_gradients(inputs, targets, &mut analytic);
    let analytic: Vec<f64> = analytic.iter().copied().collect();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (idx, g) in analytic.iter().enumerate() {
        let original = *probe.params_mut().nth(idx).expect("index in range");
        *probe.params_mut().nth(idx).unwrap() = original + H;
        let plus = probe.mse(inputs, targets);
        *probe.params_mut().nth(idx).unwrap() = original - H;
        let minus = probe.mse(inputs, targets);
        *probe.params_mut().nth(idx).unwrap() = original;
        let numeric = (plus - minus) / (2.0 * H);
        let denom = g.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((g - numeric).abs() / denom);
    }
    worst
}
