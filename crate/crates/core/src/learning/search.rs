//! Grid search over batch size, learning rate, architecture and encoding.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::dataset::{build_dataset, Encoding, ErrorDataset, Role};
use super::train::{mlp_train, History, TrainConfig, DEFAULT_HIDDEN};
use crate::error::{Error, Result};
use crate::kinematics::DhTable;
use crate::phystwin::StepRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchGrid {
    pub batch_sizes: Vec<usize>,
    pub learning_rates: Vec<f64>,
    /// Hidden layer widths per candidate architecture.
    pub architectures: Vec<Vec<usize>>,
    pub encodings: Vec<Encoding>,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            batch_sizes: vec![32, 64],
            learning_rates: vec![0.0064, 0.002],
            architectures: vec![DEFAULT_HIDDEN.to_vec(), vec![32, 32], vec![16]],
            encodings: Encoding::ALL.to_vec(),
        }
    }
}

impl SearchGrid {
    pub fn single(batch_size: usize, learning_rate: f64, hidden: &[usize], encoding: Encoding) -> Self {
        Self {
            batch_sizes: vec![batch_size],
            learning_rates: vec![learning_rate],
            architectures: vec![hidden.to_vec()],
            encodings: vec![encoding],
        }
    }

    /// Cells in a fixed order: encoding, architecture, batch size, learning rate.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::new();
        for &encoding in &self.encodings {
            for hidden in &self.architectures {
                for &batch_size in &self.batch_sizes {
                    for &learning_rate in &self.learning_rates {
                        out.push(GridCell {
                            index: out.len(),
                            encoding,
                            hidden: hidden.clone(),
                            batch_size,
                            learning_rate,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub index: usize,
    pub encoding: Encoding,
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl GridCell {
    /// Label such as `16-32-CPE`.
    pub fn label(&self) -> String {
        let arch: Vec<String> = self.hidden.iter().map(usize::to_string).collect();
        format!("{}-{}-bs{}-lr{}", arch.join("-"), self.encoding, self.batch_size, self.learning_rate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub cell: GridCell,
    /// 1-based rank; failed cells rank last.
    pub rank: usize,
    pub outcome: std::result::Result<History, String>,
}

impl SearchResult {
    pub fn best_val_mse(&self) -> f64 {
        self.outcome
            .as_ref()
            .map(|h| h.best_val_mse)
            .unwrap_or(f64::INFINITY)
    }
}

/// Trains every grid cell on the records and ranks cells by best validation
/// loss. All cells share `base.seed`, so a one-cell grid reproduces a direct
/// [`mlp_train`] call. Failures are recorded per cell. Up to `workers` cells
/// train concurrently; results do not depend on the worker count.
pub fn hyperparameter_search(
    records: &[StepRecord],
    role: Role,
    dh: &DhTable,
    grid: &SearchGrid,
    base: &TrainConfig,
    workers: usize,
) -> Result<Vec<SearchResult>> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(Error::InvalidConfig("empty search grid".into()));
    }
    let mut datasets: HashMap<Encoding, ErrorDataset> = HashMap::new();
    for &enc in &grid.encodings {
        if !datasets.contains_key(&enc) {
            datasets.insert(enc, build_dataset(records, role, enc, dh)?);
        }
    }
    let run = |cell: &GridCell| -> std::result::Result<History, String> {
        let cfg = TrainConfig {
            batch_size: cell.batch_size,
            learning_rate: cell.learning_rate,
            ..base.clone()
        };
        mlp_train(&datasets[&cell.encoding], &cell.hidden, &cfg)
            .map(|(_, h)| h)
            .map_err(|e| e.to_string())
    };

    let outcomes: Mutex<Vec<Option<std::result::Result<History, String>>>> =
        Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    let workers = workers.clamp(1, cells.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let outcome = run(&cells[i]);
                outcomes.lock().expect("poisoned")[i] = Some(outcome);
            });
        }
    });
    let outcomes = outcomes.into_inner().expect("poisoned");

    let mut results: Vec<SearchResult> = cells
        .into_iter()
        .zip(outcomes)
        .map(|(cell, outcome)| SearchResult {
            cell,
            rank: 0,
            outcome: outcome.expect("every cell ran"),
        })
        .collect();
    results.sort_by(|a, b| {
        a.best_val_mse()
            .total_cmp(&b.best_val_mse())
            .then(a.cell.index.cmp(&b.cell.index))
    });
    for (i, r) in results.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(results)
}
