use serde::{Deserialize, Serialize};

/// Features with a standard deviation below this are treated as constant.
const MIN_STD: f64 = 1e-12;

/// Per-feature zero-mean, unit-variance scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn identity(width: usize) -> Self {
        Self {
            mean: vec![0.0; width],
            std: vec![1.0; width],
        }
    }

    /// Fits mean and population standard deviation per column. Constant
    /// columns keep their mean and get `std = 1`.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let n = rows.len().max(1) as f64;
        // shifted by the first row so constant columns come out exact
        let shift: Vec<f64> = rows.first().map(|r| r.as_ref().to_vec()).unwrap_or_default();
        let mut mean = vec![0.0; width];
        for r in rows {
            for ((m, v), s) in mean.iter_mut().zip(r.as_ref()).zip(&shift) {
                *m += v - s;
            }
        }
        mean.iter_mut().zip(&shift).for_each(|(m, s)| *m = s + *m / n);
        let mut var = vec![0.0; width];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r.as_ref()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > MIN_STD {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}
