//! Three-stage error injection and the simulated-versus-physical comparison.

mod compare;
mod inject;
mod ks;

pub use compare::{compare, ComparisonReport, ErrorLayer, Histogram, KsRow, StepErrors, Summary, HISTOGRAM_BINS};
pub use inject::{inject, uninjected, InjectionResult, Injector};
pub use ks::ks_statistic;
