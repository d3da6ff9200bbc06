//! Session planning, reporting and the end-to-end reproduction.

mod comfort;
mod config;
mod plan;
mod report;
mod reproduce;

pub use comfort::{aggregate_comfort, ComfortRating, ComfortRatings, ComfortSummary, DutyComfort};
pub use config::{ExperimentConfig, DEFAULT_SEED};
pub use plan::{plan_session, PlanConfig, ProtocolPlan, ScheduledTrial};
pub use report::{
    analyze_sets, box_stats, build_report, Analysis, BoxCell, BoxStats, MajorityVote, Provenance,
    ReportBundle, Scope, StatsReport,
};
pub use reproduce::{
    reproduce, reproduce_with, ReproduceOptions, AMPLITUDES_FILE, BOX_FILE, CONFIG_FILE,
    DEFAULT_SUBJECTS, EDF_DIR, PLAN_FILE, REPORT_FILE,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::io::IoError;
use crate::simulate::SimError;
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("plan: {0}")]
    Plan(String),
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("comfort ratings row {row}: {reason}")]
    Comfort { row: usize, reason: String },
    #[error("box statistics of an empty group")]
    EmptyBox,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Fs {
        path: PathBuf,
        source: std::io::Error,
    },
}
