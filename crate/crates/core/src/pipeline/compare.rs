use serde::{Deserialize, Serialize};

use super::inject::InjectionResult;
use super::ks::ks_statistic;
use crate::error::{Error, Result};
use crate::kinematics::{joint_difference, rotation_error, translation_error, DhTable, DOF};
use crate::phystwin::StepRecord;

/// Bins per error histogram.
pub const HISTOGRAM_BINS: usize = 40;

/// Which joint-space error a distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorLayer {
    /// Measured minus setpoint.
    #[serde(rename = "M-S")]
    Controller,
    /// Actual minus measured.
    #[serde(rename = "A-M")]
    Mechanism,
}

impl ErrorLayer {
    pub fn tag(self) -> &'static str {
        match self {
            ErrorLayer::Controller => "M-S",
            ErrorLayer::Mechanism => "A-M",
        }
    }
}

/// Pose errors of one step against the physical actual pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepErrors {
    pub k: usize,
    /// Meters.
    pub translation_injected: f64,
    /// Radians.
    pub rotation_injected: f64,
    pub translation_uninjected: f64,
    pub rotation_uninjected: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: 0.0,
                std: 0.0,
                median: 0.0,
                max: 0.0,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 0 {
            0.5 * (sorted[mid - 1] + sorted[mid])
        } else {
            sorted[mid]
        };
        Self {
            mean,
            std: var.sqrt(),
            median,
            max: sorted[sorted.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsRow {
    pub layer: ErrorLayer,
    pub joint: usize,
    pub statistic: f64,
}

/// Shared-bin histogram of one joint error for both robots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub layer: ErrorLayer,
    pub joint: usize,
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub physical: Vec<usize>,
    pub simulated: Vec<usize>,
}

impl Histogram {
    fn new(layer: ErrorLayer, joint: usize, physical: &[f64], simulated: &[f64], bins: usize) -> Self {
        let all = physical.iter().chain(simulated);
        let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if lo.is_finite() && hi > lo {
            (lo, hi)
        } else if lo.is_finite() {
            (lo - 0.5, lo + 0.5)
        } else {
            (0.0, 1.0)
        };
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let count = |vals: &[f64]| {
            let mut c = vec![0; bins];
            for v in vals {
                let b = (((v - lo) / width) as usize).min(bins - 1);
                c[b] += 1;
            }
            c
        };
        Self {
            layer,
            joint,
            edges,
            physical: count(physical),
            simulated: count(simulated),
        }
    }
}

/// Simulated against physical robot over one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub steps: Vec<StepErrors>,
    pub translation_injected: Summary,
    pub rotation_injected: Summary,
    pub translation_uninjected: Summary,
    pub rotation_uninjected: Summary,
    pub ks: Vec<KsRow>,
    pub histograms: Vec<Histogram>,
    /// Steps whose injected command was clamped.
    pub clamped_steps: usize,
}

impl ComparisonReport {
    /// Mean uninjected error over mean injected error, translation then rotation.
    pub fn improvement(&self) -> (f64, f64) {
        (
            self.translation_uninjected.mean / self.translation_injected.mean,
            self.rotation_uninjected.mean / self.rotation_injected.mean,
        )
    }

    pub fn max_ks(&self, layer: ErrorLayer) -> f64 {
        self.ks
            .iter()
            .filter(|r| r.layer == layer)
            .map(|r| r.statistic)
            .fold(0.0, f64::max)
    }
}

/// Per-step pose errors between the physical actual poses and the simulated
/// ones, with and without injection, plus per-joint error distributions.
pub fn compare(
    dh: &DhTable,
    physical: &[StepRecord],
    simulated: &[InjectionResult],
) -> Result<ComparisonReport> {
    if physical.len() != simulated.len() {
        return Err(Error::LengthMismatch {
            left: physical.len(),
            right: simulated.len(),
        });
    }
    if physical.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut steps = Vec::with_capacity(physical.len());
    for (pos, (p, s)) in physical.iter().zip(simulated).enumerate() {
        if p.k != s.k {
            return Err(Error::InvalidConfig(format!(
                "step index mismatch at position {pos}: physical k = {}, simulated k = {}",
                p.k, s.k
            )));
        }
        if p.setpoint_q != s.setpoint_q {
            return Err(Error::InvalidConfig("setpoints differ".into()).at_step(p.k));
        }
        let bare = dh.forward_unchecked(&p.setpoint_q);
        steps.push(StepErrors {
            k: p.k,
            translation_injected: translation_error(&p.actual_pose, &s.actual_pose),
            rotation_injected: rotation_error(&p.actual_pose, &s.actual_pose),
            translation_uninjected: translation_error(&p.actual_pose, &bare),
            rotation_uninjected: rotation_error(&p.actual_pose, &bare),
        });
    }
    let column = |f: fn(&StepErrors) -> f64| Summary::of(&steps.iter().map(f).collect::<Vec<_>>());

    let mut ks = Vec::with_capacity(2 * DOF);
    let mut histograms = Vec::with_capacity(2 * DOF);
    for layer in [ErrorLayer::Controller, ErrorLayer::Mechanism] {
        let (phys, sim): (Vec<[f64; DOF]>, Vec<[f64; DOF]>) = physical
            .iter()
            .zip(simulated)
            .map(|(p, s)| match layer {
                ErrorLayer::Controller => (
                    joint_difference(dh, &p.measured_q, &p.setpoint_q).0,
                    joint_difference(dh, &s.measured_q, &s.setpoint_q).0,
                ),
                ErrorLayer::Mechanism => (
                    joint_difference(dh, &p.actual_q, &p.measured_q).0,
                    joint_difference(dh, &s.actual_q, &s.measured_q).0,
                ),
            })
            .unzip();
        for joint in 0..DOF {
            let a: Vec<f64> = phys.iter().map(|v| v[joint]).collect();
            let b: Vec<f64> = sim.iter().map(|v| v[joint]).collect();
            ks.push(KsRow {
                layer,
                joint,
                statistic: ks_statistic(&a, &b),
            });
            histograms.push(Histogram::new(layer, joint, &a, &b, HISTOGRAM_BINS));
        }
    }

    Ok(ComparisonReport {
        translation_injected: column(|s| s.translation_injected),
        rotation_injected: column(|s| s.rotation_injected),
        translation_uninjected: column(|s| s.translation_uninjected),
        rotation_uninjected: column(|s| s.rotation_uninjected),
        steps,
        ks,
        histograms,
        clamped_steps: simulated.iter().filter(|s| s.clamped).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{JointConfig, Pose};

    fn records(dh: &DhTable, n: usize) -> Vec<StepRecord> {
        (0..n)
            .map(|k| {
                let t = k as f64;
                let s = JointConfig([0.1 * t.sin(), 0.05, 0.1 + 0.001 * t, 0.2, -0.1, 0.3 * t.cos()]);
                let m = s + JointConfig([1e-3 * t.cos(), 0.0, 1e-4, 0.0, 2e-3, 0.0]);
                let a = m + JointConfig([0.0, 2e-3 * t.sin(), 0.0, 1e-3, 0.0, -1e-3]);
                StepRecord {
                    k,
                    setpoint_q: s,
                    measured_q: m,
                    actual_pose: dh.forward_unchecked(&a),
                    actual_q: a,
                    tracker_marker: Pose::identity(),
                    true_actual_pose: None,
                }
            })
            .collect()
    }

    #[test]
    fn physical_against_itself() {
        let dh = DhTable::default();
        let phys = records(&dh, 20);
        let sim: Vec<_> = phys.iter().map(|r| InjectionResult::from_record(&dh, r)).collect();
        let rep = compare(&dh, &phys, &sim).unwrap();
        assert_eq!(rep.translation_injected.max, 0.0);
        assert_eq!(rep.rotation_injected.max, 0.0);
        assert!(rep.translation_uninjected.mean > 0.0);
        assert!(rep.ks.iter().all(|r| r.statistic == 0.0));
        assert_eq!(rep.ks.len(), 12);
        for h in &rep.histograms {
            assert_eq!(h.physical, h.simulated);
            assert_eq!(h.physical.iter().sum::<usize>(), 20);
        }
    }

    #[test]
    fn length_and_index_mismatch() {
        let dh = DhTable::default();
        let phys = records(&dh, 4);
        let mut sim: Vec<_> = phys.iter().map(|r| InjectionResult::from_record(&dh, r)).collect();
        sim.pop();
        assert!(matches!(compare(&dh, &phys, &sim), Err(Error::LengthMismatch { left: 4, right: 3 })));
        sim.push(InjectionResult::from_record(&dh, &phys[2]));
        assert!(compare(&dh, &phys, &sim).is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[3.0, 1.0, 2.0, 6.0]);
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.max, 6.0);
        assert!((s.std - 3.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(Summary::of(&[4.0, 1.0, 2.0]).median, 2.0);
    }

    #[test]
    fn histogram_edges_and_counts() {
        let h = Histogram::new(ErrorLayer::Controller, 0, &[0.0, 1.0], &[0.5], 4);
        assert_eq!(h.edges, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(h.physical, vec![1, 0, 0, 1]);
        assert_eq!(h.simulated, vec![0, 0, 1, 0]);
        let flat = Histogram::new(ErrorLayer::Mechanism, 1, &[2.0], &[2.0], 2);
        assert_eq!(flat.physical.iter().sum::<usize>(), 1);
    }
}
