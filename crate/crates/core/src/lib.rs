//! Toolkit for duty-cycle SSVEP experiments.
//!
//! The crate covers the whole desk-side path of a flicker duty-cycle study:
//!
//! * [`waveform`] builds tick-quantized PWM schedules and measures them back.
//! * [`edf`] reads and writes EDF recordings bit-exactly.
//! * [`simulate`] synthesizes SSVEP trials with a planted duty-cycle response.
//! * [`pipeline`] band-passes, segments and extracts per-epoch FFT peak amplitudes.
//! * [`stats`] runs tie-corrected Kruskal-Wallis tests over duty-cycle groups.
//! * [`protocol`] plans sessions, aggregates reports and runs the full reproduction.

pub mod condition;
pub mod edf;
pub mod io;
pub mod pipeline;
pub mod protocol;
pub mod series;
pub mod simulate;
pub mod stats;
pub mod waveform;

pub use condition::{Condition, TrialId};
pub use series::SampleSeries;

/// Sampling rate of the recordings analysed throughout the crate.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 128.0;
/// Length of one recorded trial.
pub const DEFAULT_TRIAL_S: f64 = 30.0;
/// Stimulus frequencies of the default protocol, in presentation order.
pub const DEFAULT_FREQUENCIES_HZ: [f64; 4] = [7.0, 8.0, 9.0, 10.0];
/// Duty cycles of the default protocol.
pub const DEFAULT_DUTIES_PCT: [f64; 5] = [50.0, 80.0, 85.0, 90.0, 95.0];
/// Channel carrying the analysed occipital signal.
pub const DEFAULT_CHANNEL: &str = "O2";
