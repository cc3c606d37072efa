//! Mini-batch Adam on MSE with best-validation checkpointing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::ErrorDataset;
use super::mlp::{MlpModel, Params};
use super::normalize::Normalizer;
use crate::error::{Error, Result};
use crate::kinematics::DOF;

/// Hidden layer widths used for both networks unless configured otherwise.
pub const DEFAULT_HIDDEN: [usize; 2] = [16, 32];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            learning_rate: 0.0064,
            epochs: 500,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            val_fraction: 0.2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return bad("val_fraction must be in (0, 1)");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must be in [0, 1)");
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam_eps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochLoss>,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
    pub best_val_mse: f64,
}

impl History {
    /// Running minimum of the validation loss.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.epochs
            .iter()
            .scan(f64::INFINITY, |best, e| {
                *best = best.min(e.val_mse);
                Some(*best)
            })
            .collect()
    }

    /// First epoch (1-based) whose best-so-far validation loss is within
    /// `fraction` of the final best.
    pub fn epochs_to_within(&self, fraction: f64) -> usize {
        let threshold = self.best_val_mse * (1.0 + fraction);
        self.best_so_far()
            .iter()
            .position(|v| *v <= threshold)
            .map(|p| p + 1)
            .unwrap_or(self.epochs.len())
    }
}

struct Adam {
    m: Params,
    v: Params,
    t: i32,
}

impl Adam {
    fn new(model: &MlpModel) -> Self {
        Self {
            m: Params::zeros_like(model),
            v: Params::zeros_like(model),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &Params, cfg: &TrainConfig) {
        self.t += 1;
        let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let updates = model
            .params_mut()
            .zip(grads.iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()));
        for ((p, g), (m, v)) in updates {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
        }
    }
}

/// Seeded random train/validation split; returns (train, val) indices.
pub fn split_indices(n: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_val = ((n as f64) * val_fraction).round() as usize;
    let val = idx.split_off(n - n_val.min(n));
    (idx, val)
}

/// Trains a network with the given hidden layer widths.
///
/// Normalizers are fit on the training split. Each epoch shuffles the
/// training samples with a seeded stream, runs one Adam step per mini-batch,
/// and records full-pass train and validation MSE in normalized target
/// space. The returned model holds the weights of the best validation epoch.
pub fn mlp_train(
    dataset: &ErrorDataset,
    hidden: &[usize],
    cfg: &TrainConfig,
) -> Result<(MlpModel, History)> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (train_idx, val_idx) = split_indices(dataset.len(), cfg.val_fraction, cfg.seed);
    if val_idx.is_empty() || train_idx.len() < cfg.batch_size {
        return Err(Error::InvalidConfig(format!(
            "{} samples leave {} for training and {} for validation; need at least one batch of {} and one validation sample",
            dataset.len(),
            train_idx.len(),
            val_idx.len(),
            cfg.batch_size
        )));
    }

    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(dataset.width());
    sizes.extend_from_slice(hidden);
    sizes.push(DOF);
    let mut model = MlpModel::new_random(&sizes, dataset.encoding, dataset.role, cfg.seed)?;

    let train_x: Vec<&Vec<f64>> = train_idx.iter().map(|&i| &dataset.inputs[i]).collect();
    let train_t: Vec<&[f64; DOF]> = train_idx.iter().map(|&i| &dataset.targets[i]).collect();
    model.input_normalizer = Normalizer::fit(&train_x);
    model.target_normalizer = Normalizer::fit(&train_t);

    let norm = |ids: &[usize]| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        ids.iter()
            .map(|&i| {
                (
                    model.input_normalizer.normalize(&dataset.inputs[i]),
                    model.target_normalizer.normalize(&dataset.targets[i]),
                )
            })
            .unzip()
    };
    let (tx, tt) = norm(&train_idx);
    let (vx, vt) = norm(&val_idx);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed));
    let mut adam = Adam::new(&model);
    let mut grads = Params::zeros_like(&model);
    let mut order: Vec<usize> = (0..tx.len()).collect();
    let mut history = History {
        best_val_mse: f64::INFINITY,
        ..History::default()
    };
    let mut best = model.clone();
    let mut bx: Vec<&[f64]> = Vec::with_capacity(cfg.batch_size);
    let mut bt: Vec<&[f64]> = Vec::with_capacity(cfg.batch_size);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            bx.clear();
            bt.clear();
            bx.extend(chunk.iter().map(|&i| tx[i].as_slice()));
            bt.extend(chunk.iter().map(|&i| tt[i].as_slice()));
            let loss = model.loss_and_gradients(&bx, &bt, &mut grads);
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged {
                    epoch,
                    loss,
                    learning_rate: cfg.learning_rate,
                });
            }
            adam.step(&mut model, &grads, cfg);
        }
        let train_mse = model.mse(&tx, &tt);
        let val_mse = model.mse(&vx, &vt);
        if !train_mse.is_finite() || !val_mse.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                loss: if train_mse.is_finite() { val_mse } else { train_mse },
                learning_rate: cfg.learning_rate,
            });
        }
        history.epochs.push(EpochLoss {
            epoch,
            train_mse,
            val_mse,
        });
        if val_mse < history.best_val_mse {
            history.best_val_mse = val_mse;
            history.best_epoch = epoch;
            best.weights.clone_from(&model.weights);
            best.biases.clone_from(&model.biases);
        }
    }
    Ok((best, history))
}
