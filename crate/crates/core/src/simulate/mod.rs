//! Synthetic SSVEP trials with a planted duty-cycle response.
//!
//! Each trial is a sinusoid at the stimulus frequency with an optional second
//! harmonic, plus a mix of pink and white background noise. The fundamental's
//! amplitude is chosen so that, in a noiseless trial, the analysis pipeline
//! recovers the model's target peak amplitude exactly: a sine of amplitude
//! `a` peaks at `a·N/2` in an `N`-point epoch, so `a = target / (N/2)`.
//! Noise is scaled the same way, so `noise_sd` reads in amplitude units.
//!
//! # Seeding
//!
//! Every trial draws from its own ChaCha8 stream. The 32-byte stream seed is
//! `SHA-256("ssvep-sim/v1" ‖ master ‖ subject ‖ freq_mHz ‖ duty_m% ‖ trial)`
//! with integers little-endian (`u64`, `u32`, `i64`, `i64`, `u32`), so trials
//! can be generated in any order or in parallel with identical results.

mod model;
mod noise;
mod reference;

pub use model::ResponseModel;
pub use noise::{gen_pink_noise, pink_noise, white_noise};
pub use reference::REFERENCE_AVERAGES;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::condition::{format_quantity, milli_key, Condition, TrialId};
use crate::edf::{EdfError, EdfFileHeader, EdfRecording, SignalHeader};
use crate::protocol::ProtocolPlan;
use crate::series::SampleSeries;
use crate::{DEFAULT_CHANNEL, DEFAULT_SAMPLE_RATE_HZ, DEFAULT_TRIAL_S};

/// Physical range written to simulated EDF files: one digital step is 0.01 units.
pub const EDF_PHYSICAL_MIN: f64 = -327.68;
pub const EDF_PHYSICAL_MAX: f64 = 327.67;
pub const EDF_DIMENSION: &str = "raw";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("response model: {0}")]
    Model(String),
    #[error("config: {0}")]
    Config(String),
    #[error("no model amplitude for {0}")]
    UnknownCondition(Condition),
    #[error("noise length must be at least 1")]
    EmptyNoise,
    #[error(transparent)]
    Edf(#[from] EdfError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Background noise level in the same units as the model amplitudes:
    /// white noise at this setting moves an epoch's spectral peak by about
    /// `noise_sd` (one standard deviation). Per sample the noise SD is
    /// `noise_sd / sqrt(N/2)`.
    pub noise_sd: f64,
    /// Share of noise power that is pink; the rest is white.
    pub pink_fraction: f64,
    /// Second-harmonic amplitude relative to the fundamental.
    pub harmonic_fraction: f64,
    pub seed: u64,
    pub fs_hz: f64,
    pub trial_s: f64,
    /// Epoch length the amplitude calibration targets.
    pub epoch_s: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            noise_sd: 8.0,
            pink_fraction: 0.5,
            harmonic_fraction: 0.2,
            seed: 0,
            fs_hz: DEFAULT_SAMPLE_RATE_HZ,
            trial_s: DEFAULT_TRIAL_S,
            epoch_s: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return bad("noise_sd must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.pink_fraction) {
            return bad("pink_fraction must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.harmonic_fraction) {
            return bad("harmonic_fraction must lie in [0, 1)");
        }
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return bad("fs_hz must be positive");
        }
        if !(self.trial_s.is_finite() && self.trial_s > 0.0) {
            return bad("trial_s must be positive");
        }
        if !(self.epoch_s.is_finite() && self.epoch_s > 0.0) {
            return bad("epoch_s must be positive");
        }
        Ok(())
    }

    pub fn samples_per_trial(&self) -> usize {
        (self.fs_hz * self.trial_s).round() as usize
    }

    /// `N/2` for the analysis epoch: the peak magnitude of a unit sine.
    pub fn unit_peak(&self) -> f64 {
        (self.fs_hz * self.epoch_s).round() / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSignal {
    pub id: TrialId,
    pub series: SampleSeries,
}

fn trial_rng(master: u64, id: &TrialId) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"ssvep-sim/v1");
    h.update(master.to_le_bytes());
    h.update(id.subject.to_le_bytes());
    h.update(milli_key(id.condition.frequency_hz).to_le_bytes());
    h.update(milli_key(id.condition.duty_pct).to_le_bytes());
    h.update(id.trial.to_le_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

pub fn synth_trial(
    id: TrialId,
    model: &ResponseModel,
    config: &SimConfig,
) -> Result<TrialSignal, SimError> {
    config.validate()?;
    let target = model
        .amplitude(&id.condition)
        .ok_or(SimError::UnknownCondition(id.condition))?;
    let n = config.samples_per_trial();
    let mut rng = trial_rng(config.seed, &id);
    let phase: f64 = rng.random_range(0.0..2.0 * PI);
    let phase2: f64 = rng.random_range(0.0..2.0 * PI);
    let pink = pink_noise(n, &mut rng);
    let white = white_noise(n, &mut rng);

    let a = target / config.unit_peak();
    let a2 = config.harmonic_fraction * a;
    let w = 2.0 * PI * id.condition.frequency_hz / config.fs_hz;
    let sample_sd = config.noise_sd / config.unit_peak().sqrt();
    let pink_gain = sample_sd * config.pink_fraction.sqrt();
    let white_gain = sample_sd * (1.0 - config.pink_fraction).sqrt();
    let values = (0..n)
        .map(|i| {
            let t = i as f64;
            a * (w * t + phase).sin()
                + a2 * (2.0 * w * t + phase2).sin()
                + pink_gain * pink[i]
                + white_gain * white[i]
        })
        .collect();
    let series = SampleSeries::new(values, config.fs_hz, DEFAULT_CHANNEL)
        .map_err(|e| SimError::Config(e.to_string()))?;
    Ok(TrialSignal { id, series })
}

/// Quantizes a trial into a single-channel EDF recording with 1 s records.
pub fn trial_to_edf(trial: &TrialSignal) -> Result<EdfRecording, SimError> {
    let fs = trial.series.sample_rate_hz();
    if fs.fract() != 0.0 {
        return Err(SimError::Config(format!(
            "sample rate {fs} Hz does not give whole samples per 1 s record"
        )));
    }
    let mut signal = SignalHeader::new(
        DEFAULT_CHANNEL,
        EDF_PHYSICAL_MIN,
        EDF_PHYSICAL_MAX,
        fs as usize,
    );
    signal.physical_dimension = EDF_DIMENSION.into();
    signal.transducer = "synthetic SSVEP".into();
    let digital = trial
        .series
        .values()
        .iter()
        .map(|&v| signal.to_digital(v))
        .collect();
    let mut header = EdfFileHeader::new(0, 1.0, 1);
    header.patient_id = format!("S{}", trial.id.subject);
    header.recording_id = format!(
        "f={}Hz d={}% t={}",
        format_quantity(trial.id.condition.frequency_hz),
        format_quantity(trial.id.condition.duty_pct),
        trial.id.trial
    );
    Ok(EdfRecording::single_channel(header, signal, digital)?)
}

/// All trials of `plan` for every subject, as EDF recordings in
/// (subject, schedule) order.
pub fn synth_session_recordings(
    subject_ids: &[u32],
    model: &ResponseModel,
    config: &SimConfig,
    plan: &ProtocolPlan,
) -> Result<Vec<(TrialId, EdfRecording)>, SimError> {
    config.validate()?;
    for entry in &plan.schedule {
        if model.amplitude(&entry.condition).is_none() {
            return Err(SimError::UnknownCondition(entry.condition));
        }
    }
    let ids: Vec<TrialId> = subject_ids
        .iter()
        .flat_map(|&subject| {
            plan.schedule.iter().map(move |e| TrialId {
                subject,
                condition: e.condition,
                trial: e.trial,
            })
        })
        .collect();
    ids.par_iter()
        .map(|id| {
            let trial = synth_trial(*id, model, config)?;
            Ok((*id, trial_to_edf(&trial)?))
        })
        .collect()
}

/// Writes one EDF file per trial into `out_dir`, named by [`TrialId::file_name`].
pub fn synth_session(
    subject_ids: &[u32],
    model: &ResponseModel,
    config: &SimConfig,
    plan: &ProtocolPlan,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, SimError> {
    let recordings = synth_session_recordings(subject_ids, model, config, plan)?;
    fs::create_dir_all(out_dir).map_err(|source| SimError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    recordings
        .par_iter()
        .map(|(id, rec)| {
            let path = out_dir.join(id.file_name());
            let bytes = crate::edf::write_edf(rec)?;
            fs::write(&path, bytes).map_err(|source| SimError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}
