use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("joint {joint} value {value} outside limits [{lo}, {hi}]")]
    JointOutOfLimits {
        joint: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("inverse kinematics did not converge after {iterations} iterations (position residual {pos_residual:e} m, rotation residual {rot_residual:e} rad)")]
    IkNoConvergence {
        iterations: usize,
        pos_residual: f64,
        rot_residual: f64,
    },

    #[error("invalid DH table: {0}")]
    InvalidDhTable(String),

    #[error("too few observations: got {got}, need at least {need}")]
    TooFewObservations { got: usize, need: usize },

    #[error("degenerate motion: {0}")]
    DegenerateMotion(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("records out of order at position {position} (k = {k})")]
    UnorderedRecords { position: usize, k: usize },

    #[error("step {k}: {source}")]
    Step {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("input width {got} does not match model input width {expected}")]
    WidthMismatch { got: usize, expected: usize },

    #[error("training diverged at epoch {epoch}: loss is {loss}; try a smaller learning rate (current {learning_rate})")]
    TrainingDiverged {
        epoch: usize,
        loss: f64,
        learning_rate: f64,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("length mismatch: {left} physical records vs {right} simulated steps")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid pose: {0}")]
    InvalidPose(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    /// Short stable identifier used in machine-parsable CLI output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::JointOutOfLimits { .. } => "joint_out_of_limits",
            Error::IkNoConvergence { .. } => "ik_no_convergence",
            Error::InvalidDhTable(_) => "invalid_dh_table",
            Error::TooFewObservations { .. } => "too_few_observations",
            Error::DegenerateMotion(_) => "degenerate_motion",
            Error::InvalidConfig(_) => "invalid_config",
            Error::UnorderedRecords { .. } => "unordered_records",
            Error::Step { source, .. } => source.kind(),
            Error::WidthMismatch { .. } => "width_mismatch",
            Error::TrainingDiverged { .. } => "training_diverged",
            Error::EmptyDataset => "empty_dataset",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidPose(_) => "invalid_pose",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
        }
    }

    pub(crate) fn at_step(self, k: usize) -> Error {
        Error::Step {
            k,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Error {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
