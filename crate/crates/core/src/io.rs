//! File formats: dataset, trajectory and injection CSVs, JSON documents and
//! report tables.
//!
//! Writers render into memory first so a command can validate everything
//! before touching the file system. Floats are written in shortest
//! round-trip form, so equal values always produce equal bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::calibration::HandEyeSolution;
use crate::error::{Error, Result};
use crate::kinematics::{DhTable, JointConfig, Pose, DOF};
use crate::learning::{History, SearchResult};
use crate::phystwin::{resolve_actual_joints, StepRecord};
use crate::pipeline::{ComparisonReport, InjectionResult, Summary};

/// Allowed deviation of a stored quaternion from unit norm.
pub const QUATERNION_NORM_TOL: f64 = 1e-6;

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_file(path)?).map_err(|e| Error::parse(path, e))
}

fn joint_headers(prefix: &str) -> impl Iterator<Item = String> + '_ {
    (1..=DOF).map(move |i| format!("{prefix}_q{i}"))
}

fn pose_headers(prefix: &str) -> impl Iterator<Item = String> + '_ {
    ["qw", "qx", "qy", "qz", "tx", "ty", "tz"]
        .into_iter()
        .map(move |c| format!("{prefix}_{c}"))
}

fn push_joints(row: &mut Vec<String>, q: &JointConfig) {
    row.extend(q.as_array().iter().map(f64::to_string));
}

fn push_pose(row: &mut Vec<String>, p: &Pose) {
    row.extend(p.quaternion().iter().map(f64::to_string));
    row.extend(p.translation.iter().map(f64::to_string));
}

fn render_csv(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Parsed CSV rows, checked against the expected header.
struct Table<'a> {
    path: &'a Path,
    rows: Vec<csv::StringRecord>,
}

impl<'a> Table<'a> {
    fn load(path: &'a Path, expected: &[String]) -> Result<Self> {
        let text = read_file(path)?;
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| Error::parse(path, e))?.clone();
        if header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(Error::parse(
                path,
                format!("unexpected columns; expected {}", expected.join(",")),
            ));
        }
        let rows = r
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, e))?;
        Ok(Self { path, rows })
    }

    fn num(&self, row: usize, col: usize) -> Result<f64> {
        let s = &self.rows[row][col];
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::parse(self.path, format!("row {}: bad number '{s}'", row + 1)))
    }

    fn index(&self, row: usize) -> Result<usize> {
        let s = &self.rows[row][0];
        s.trim()
            .parse()
            .map_err(|_| Error::parse(self.path, format!("row {}: bad step index '{s}'", row + 1)))
    }

    fn joints(&self, row: usize, col: usize) -> Result<JointConfig> {
        let mut q = JointConfig::ZERO;
        for i in 0..DOF {
            q[i] = self.num(row, col + i)?;
        }
        Ok(q)
    }

    fn pose(&self, row: usize, col: usize, k: usize) -> Result<Pose> {
        let mut v = [0.0; 7];
        for (i, x) in v.iter_mut().enumerate() {
            *x = self.num(row, col + i)?;
        }
        let q = [v[0], v[1], v[2], v[3]];
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > QUATERNION_NORM_TOL {
            return Err(Error::InvalidPose(format!("quaternion norm {norm} is not 1")).at_step(k));
        }
        Pose::from_quaternion(q, [v[4], v[5], v[6]]).map_err(|e| e.at_step(k))
    }
}

fn dataset_header() -> Vec<String> {
    std::iter::once("k".to_string())
        .chain(joint_headers("s1"))
        .chain(joint_headers("m1"))
        .chain(pose_headers("a1"))
        .chain(pose_headers("otm"))
        .collect()
}

/// Training-visible dataset: setpoints, encoder joints, tracker-derived
/// actual pose and raw tracker measurement per step.
pub fn dataset_to_csv(records: &[StepRecord]) -> String {
    render_csv(
        dataset_header(),
        records.iter().map(|r| {
            let mut row = vec![r.k.to_string()];
            push_joints(&mut row, &r.setpoint_q);
            push_joints(&mut row, &r.measured_q);
            push_pose(&mut row, &r.actual_pose);
            push_pose(&mut row, &r.tracker_marker);
            row
        }),
    )
}

/// Loads a dataset and resolves each actual pose to nominal-kinematics
/// joints. Failures name the step.
pub fn read_dataset(path: &Path, dh: &DhTable) -> Result<Vec<StepRecord>> {
    let t = Table::load(path, &dataset_header())?;
    let mut out = Vec::with_capacity(t.rows.len());
    for row in 0..t.rows.len() {
        let k = t.index(row)?;
        let measured_q = t.joints(row, 1 + DOF)?;
        let actual_pose = t.pose(row, 1 + 2 * DOF, k)?;
        let actual_q = resolve_actual_joints(dh, &actual_pose, &measured_q).map_err(|e| e.at_step(k))?;
        out.push(StepRecord {
            k,
            setpoint_q: t.joints(row, 1)?,
            measured_q,
            actual_pose,
            actual_q,
            tracker_marker: t.pose(row, 1 + 2 * DOF + 7, k)?,
            true_actual_pose: None,
        });
    }
    Ok(out)
}

fn trajectory_header() -> Vec<String> {
    std::iter::once("k".to_string()).chain(joint_headers("s")).collect()
}

pub fn trajectory_to_csv(setpoints: &[JointConfig]) -> String {
    render_csv(
        trajectory_header(),
        setpoints.iter().enumerate().map(|(k, q)| {
            let mut row = vec![k.to_string()];
            push_joints(&mut row, q);
            row
        }),
    )
}

pub fn read_trajectory(path: &Path) -> Result<Vec<JointConfig>> {
    let t = Table::load(path, &trajectory_header())?;
    (0..t.rows.len())
        .map(|row| {
            if t.index(row)? != row {
                return Err(Error::parse(path, format!("row {}: step index out of sequence", row + 1)));
            }
            t.joints(row, 1)
        })
        .collect()
}

fn injection_header() -> Vec<String> {
    std::iter::once("k".to_string())
        .chain(joint_headers("s2"))
        .chain(joint_headers("alpha1"))
        .chain(joint_headers("alpha2"))
        .chain(joint_headers("m2"))
        .chain(joint_headers("a2"))
        .chain(pose_headers("a2"))
        .chain(std::iter::once("clamped".to_string()))
        .collect()
}

pub fn injection_to_csv(results: &[InjectionResult]) -> String {
    render_csv(
        injection_header(),
        results.iter().map(|r| {
            let mut row = vec![r.k.to_string()];
            for q in [&r.setpoint_q, &r.alpha1, &r.alpha2, &r.measured_q, &r.actual_q] {
                push_joints(&mut row, q);
            }
            push_pose(&mut row, &r.actual_pose);
            row.push(u8::from(r.clamped).to_string());
            row
        }),
    )
}

pub fn read_injection(path: &Path) -> Result<Vec<InjectionResult>> {
    let t = Table::load(path, &injection_header())?;
    let flag_col = 1 + 5 * DOF + 7;
    (0..t.rows.len())
        .map(|row| {
            let k = t.index(row)?;
            let clamped = match t.rows[row][flag_col].trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(path, format!("row {}: bad clamped flag '{other}'", row + 1))),
            };
            Ok(InjectionResult {
                k,
                setpoint_q: t.joints(row, 1)?,
                alpha1: t.joints(row, 1 + DOF)?,
                alpha2: t.joints(row, 1 + 2 * DOF)?,
                measured_q: t.joints(row, 1 + 3 * DOF)?,
                actual_q: t.joints(row, 1 + 4 * DOF)?,
                actual_pose: t.pose(row, 1 + 5 * DOF, k)?,
                clamped,
            })
        })
        .collect()
}

/// Validation-only ground truth of a twin run. Never read by training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub dh_true: DhTable,
    pub handeye_true: HandEyeSolution,
    pub steps: Vec<TruthStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthStep {
    pub k: usize,
    pub actual_pose: Pose,
}

impl Truth {
    pub fn new(dh_true: &DhTable, handeye_true: &HandEyeSolution, records: &[StepRecord]) -> Self {
        Self {
            dh_true: dh_true.clone(),
            handeye_true: *handeye_true,
            steps: records
                .iter()
                .filter_map(|r| {
                    r.true_actual_pose.map(|actual_pose| TruthStep { k: r.k, actual_pose })
                })
                .collect(),
        }
    }
}

pub fn history_to_csv(history: &History) -> String {
    render_csv(
        ["epoch", "train_mse", "val_mse"].map(String::from).to_vec(),
        history
            .epochs
            .iter()
            .map(|e| vec![e.epoch.to_string(), e.train_mse.to_string(), e.val_mse.to_string()]),
    )
}

pub fn search_results_to_csv(results: &[SearchResult]) -> String {
    let header = [
        "rank", "cell", "encoding", "hidden", "batch_size", "learning_rate", "best_val_mse", "best_epoch",
        "epochs_to_5pct", "status",
    ];
    render_csv(
        header.map(String::from).to_vec(),
        results.iter().map(|r| {
            let hidden: Vec<String> = r.cell.hidden.iter().map(usize::to_string).collect();
            let (best, epoch, conv, status) = match &r.outcome {
                Ok(h) => (
                    h.best_val_mse.to_string(),
                    h.best_epoch.to_string(),
                    h.epochs_to_within(0.05).to_string(),
                    "ok".to_string(),
                ),
                Err(e) => (String::new(), String::new(), String::new(), format!("failed: {e}")),
            };
            vec![
                r.rank.to_string(),
                r.cell.index.to_string(),
                r.cell.encoding.to_string(),
                hidden.join("-"),
                r.cell.batch_size.to_string(),
                r.cell.learning_rate.to_string(),
                best,
                epoch,
                conv,
                status,
            ]
        }),
    )
}

/// Per-epoch losses of every successful cell, long format.
pub fn search_curves_to_csv(results: &[SearchResult]) -> String {
    let mut sorted: Vec<&SearchResult> = results.iter().collect();
    sorted.sort_by_key(|r| r.cell.index);
    render_csv(
        ["cell", "label", "epoch", "train_mse", "val_mse"].map(String::from).to_vec(),
        sorted.into_iter().flat_map(|r| {
            let label = r.cell.label();
            let index = r.cell.index;
            r.outcome.iter().flat_map(|h| h.epochs.iter()).map(move |e| {
                vec![
                    index.to_string(),
                    label.clone(),
                    e.epoch.to_string(),
                    e.train_mse.to_string(),
                    e.val_mse.to_string(),
                ]
            })
        }),
    )
}

/// Report files keyed by file name.
pub fn report_files(report: &ComparisonReport) -> Vec<(&'static str, String)> {
    vec![
        ("summary.txt", summary_table(report)),
        ("summary.csv", summary_csv(report)),
        ("step_errors.csv", step_errors_csv(report)),
        ("ks.csv", ks_csv(report)),
        ("histograms.csv", histograms_csv(report)),
    ]
}

/// Aligned text table in millimeters and degrees.
pub fn summary_table(report: &ComparisonReport) -> String {
    let rows: [(&str, &Summary, f64); 4] = [
        ("E_T without injection [mm]", &report.translation_uninjected, 1e3),
        ("E_T with injection [mm]", &report.translation_injected, 1e3),
        ("E_R without injection [deg]", &report.rotation_uninjected, 180.0 / std::f64::consts::PI),
        ("E_R with injection [deg]", &report.rotation_injected, 180.0 / std::f64::consts::PI),
    ];
    let mut s = String::new();
    let _ = writeln!(s, "{:<28} {:>9} {:>9} {:>9} {:>9}", "", "mean", "std", "median", "max");
    for (name, st, scale) in rows {
        let _ = writeln!(
            s,
            "{:<28} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            name,
            st.mean * scale,
            st.std * scale,
            st.median * scale,
            st.max * scale
        );
    }
    let (ft, fr) = report.improvement();
    let _ = writeln!(s, "\nimprovement: translation {ft:.2}x, rotation {fr:.2}x");
    let _ = writeln!(s, "steps: {}, clamped: {}", report.steps.len(), report.clamped_steps);
    s
}

pub fn summary_csv(report: &ComparisonReport) -> String {
    let rows = [
        ("translation_mm", "without", &report.translation_uninjected, 1e3),
        ("translation_mm", "with", &report.translation_injected, 1e3),
        ("rotation_deg", "without", &report.rotation_uninjected, 180.0 / std::f64::consts::PI),
        ("rotation_deg", "with", &report.rotation_injected, 180.0 / std::f64::consts::PI),
    ];
    render_csv(
        ["metric", "injection", "mean", "std", "median", "max"].map(String::from).to_vec(),
        rows.into_iter().map(|(m, w, st, scale)| {
            vec![
                m.to_string(),
                w.to_string(),
                (st.mean * scale).to_string(),
                (st.std * scale).to_string(),
                (st.median * scale).to_string(),
                (st.max * scale).to_string(),
            ]
        }),
    )
}

pub fn step_errors_csv(report: &ComparisonReport) -> String {
    render_csv(
        ["k", "et_with_mm", "er_with_deg", "et_without_mm", "er_without_deg"].map(String::from).to_vec(),
        report.steps.iter().map(|s| {
            vec![
                s.k.to_string(),
                (s.translation_injected * 1e3).to_string(),
                s.rotation_injected.to_degrees().to_string(),
                (s.translation_uninjected * 1e3).to_string(),
                s.rotation_uninjected.to_degrees().to_string(),
            ]
        }),
    )
}

pub fn ks_csv(report: &ComparisonReport) -> String {
    render_csv(
        ["layer", "joint", "ks"].map(String::from).to_vec(),
        report.ks.iter().map(|r| {
            vec![r.layer.tag().to_string(), (r.joint + 1).to_string(), r.statistic.to_string()]
        }),
    )
}

pub fn histograms_csv(report: &ComparisonReport) -> String {
    render_csv(
        ["layer", "joint", "bin", "lo", "hi", "physical", "simulated"].map(String::from).to_vec(),
        report.histograms.iter().flat_map(|h| {
            (0..h.physical.len()).map(move |b| {
                vec![
                    h.layer.tag().to_string(),
                    (h.joint + 1).to_string(),
                    b.to_string(),
                    h.edges[b].to_string(),
                    h.edges[b + 1].to_string(),
                    h.physical[b].to_string(),
                    h.simulated[b].to_string(),
                ]
            })
        }),
    )
}
