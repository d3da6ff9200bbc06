//! Band-pass → 1 s segmentation → per-epoch FFT peak amplitude.

mod filter;
mod spectrum;

pub use filter::{bandpass, Bandpass, FilterSpec, WARMUP_S_PER_ORDER};
pub use spectrum::{fft_max_amplitude, PeakFinder, SpectralPeak};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::condition::Condition;
use crate::series::SampleSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("pass band [{low_hz}, {high_hz}] Hz is outside (0, {nyquist_hz}) Hz")]
    BandOutOfRange {
        low_hz: f64,
        high_hz: f64,
        nyquist_hz: f64,
    },
    #[error("filter order must be at least 1, got {0}")]
    BadFilterOrder(usize),
    #[error("series of {samples} samples is shorter than the {required}-sample filter warm-up")]
    TooShortForFilter { samples: usize, required: usize },
    #[error("series of {samples} samples is shorter than one {epoch_len}-sample epoch")]
    TooShortForEpoch { samples: usize, epoch_len: usize },
    #[error("epoch length must be a positive duration, got {0} s")]
    BadEpochLength(f64),
    #[error("epoch has {actual} samples, expected {expected}")]
    EpochLength { expected: usize, actual: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("trials must share one sample rate")]
    MixedSampleRates,
    #[error("no trials supplied")]
    NoTrials,
}

/// A fixed-length window of a trial. `trial` is 1-based when set by
/// [`process_condition`], 0 otherwise; `segment` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub trial: u32,
    pub segment: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub epochs: Vec<Epoch>,
    /// Trailing samples that did not fill an epoch.
    pub dropped: usize,
}

pub fn segment(series: &SampleSeries, epoch_s: f64) -> Result<Segmentation, PipelineError> {
    if !(epoch_s.is_finite() && epoch_s > 0.0) {
        return Err(PipelineError::BadEpochLength(epoch_s));
    }
    let len = (epoch_s * series.sample_rate_hz()).round() as usize;
    if len == 0 {
        return Err(PipelineError::BadEpochLength(epoch_s));
    }
    if series.len() < len {
        return Err(PipelineError::TooShortForEpoch {
            samples: series.len(),
            epoch_len: len,
        });
    }
    let chunks = series.values().chunks_exact(len);
    let dropped = chunks.remainder().len();
    if dropped > 0 {
        log::warn!(
            "{}: dropping {dropped} trailing samples that do not fill a {len}-sample epoch",
            series.label()
        );
    }
    let epochs = chunks
        .enumerate()
        .map(|(i, c)| Epoch {
            samples: c.to_vec(),
            sample_rate_hz: series.sample_rate_hz(),
            trial: 0,
            segment: i as u32 + 1,
        })
        .collect();
    Ok(Segmentation { epochs, dropped })
}

/// Analysis settings shared by every condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub bandwidth_hz: f64,
    pub filter_order: usize,
    pub zero_phase: bool,
    pub epoch_s: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 2.0,
            filter_order: 4,
            zero_phase: true,
            epoch_s: 1.0,
        }
    }
}

impl PipelineConfig {
    pub fn filter_for(&self, center_hz: f64) -> FilterSpec {
        FilterSpec {
            center_hz,
            bandwidth_hz: self.bandwidth_hz,
            order: self.filter_order,
            zero_phase: self.zero_phase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochAmplitude {
    pub trial: u32,
    pub segment: u32,
    /// Frequency of the peak bin; unknown for amplitudes read back from a table.
    pub peak_hz: Option<f64>,
    pub amplitude: f64,
}

/// Per-epoch peak amplitudes of one subject and condition, in (trial, segment) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSet {
    pub subject: u32,
    pub condition: Condition,
    pub epochs: Vec<EpochAmplitude>,
}

impl AmplitudeSet {
    pub fn amplitudes(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.amplitude).collect()
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }
}

/// Runs one trial through the chain; epochs are tagged with `trial`.
pub fn process_trial(
    series: &SampleSeries,
    stimulus_hz: f64,
    trial: u32,
    config: &PipelineConfig,
) -> Result<Vec<EpochAmplitude>, PipelineError> {
    let filtered = bandpass(series, &config.filter_for(stimulus_hz))?;
    let seg = segment(&filtered, config.epoch_s)?;
    let Some(first) = seg.epochs.first() else {
        return Ok(Vec::new());
    };
    let mut finder = PeakFinder::new(first.samples.len());
    seg.epochs
        .iter()
        .map(|e| {
            let p = finder.peak(&e.samples, e.sample_rate_hz)?;
            Ok(EpochAmplitude {
                trial,
                segment: e.segment,
                peak_hz: Some(p.frequency_hz),
                amplitude: p.amplitude,
            })
        })
        .collect()
}

/// Band-passes each trial around the stimulus frequency, segments it and
/// keeps every epoch's peak amplitude. Trials are numbered from 1 in input order.
pub fn process_condition(
    subject: u32,
    condition: Condition,
    trials: &[SampleSeries],
    config: &PipelineConfig,
) -> Result<AmplitudeSet, PipelineError> {
    let Some(first) = trials.first() else {
        return Err(PipelineError::NoTrials);
    };
    if trials
        .iter()
        .any(|t| t.sample_rate_hz() != first.sample_rate_hz())
    {
        return Err(PipelineError::MixedSampleRates);
    }
    let mut epochs = Vec::new();
    for (i, t) in trials.iter().enumerate() {
        epochs.extend(process_trial(
            t,
            condition.frequency_hz,
            i as u32 + 1,
            config,
        )?);
    }
    Ok(AmplitudeSet {
        subject,
        condition,
        epochs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn series(values: Vec<f64>) -> SampleSeries {
        SampleSeries::new(values, 128.0, "O2").unwrap()
    }

    fn tone(freq: f64, amp: f64, phase: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / 128.0 + phase).sin())
            .collect()
    }

    #[test]
    fn segmentation_counts() {
        let s = segment(&series(vec![1.0; 3840]), 1.0).unwrap();
        assert_eq!(s.epochs.len(), 30);
        assert_eq!(s.dropped, 0);

        let x: Vec<f64> = (0..128).map(|i| i as f64).collect();
        let s = segment(&series(x.clone()), 1.0).unwrap();
        assert_eq!(s.epochs.len(), 1);
        assert_eq!(s.epochs[0].samples, x);

        let s = segment(&series(vec![0.0; 200]), 1.0).unwrap();
        assert_eq!(s.epochs.len(), 1);
        assert_eq!(s.dropped, 72);

        assert!(matches!(
            segment(&series(vec![0.0; 127]), 1.0),
            Err(PipelineError::TooShortForEpoch { .. })
        ));
    }

    #[test]
    fn segments_are_contiguous() {
        let x: Vec<f64> = (0..640).map(|i| i as f64).collect();
        let s = segment(&series(x.clone()), 1.0).unwrap();
        let joined: Vec<f64> = s.epochs.iter().flat_map(|e| e.samples.clone()).collect();
        assert_eq!(joined, x);
        assert_eq!(
            s.epochs.iter().map(|e| e.segment).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn calibrated_tone_yields_64a_everywhere() {
        let config = PipelineConfig::default();
        for f in crate::DEFAULT_FREQUENCIES_HZ {
            let trials: Vec<_> = (0..5)
                .map(|t| series(tone(f, 8.75, t as f64, 3840)))
                .collect();
            let set = process_condition(1, Condition::new(f, 85.0), &trials, &config).unwrap();
            assert_eq!(set.len(), 150);
            for e in &set.epochs {
                assert_eq!(e.peak_hz, Some(f));
                assert!(
                    (e.amplitude / (64.0 * 8.75) - 1.0).abs() < 0.01,
                    "{f} Hz {e:?}"
                );
            }
        }
    }

    #[test]
    fn zero_trials_give_zeros() {
        let trials: Vec<_> = (0..5).map(|_| series(vec![0.0; 3840])).collect();
        let set = process_condition(
            2,
            Condition::new(7.0, 50.0),
            &trials,
            &PipelineConfig::default(),
        )
        .unwrap();
        assert_eq!(set.len(), 150);
        assert!(set.amplitudes().iter().all(|&a| a == 0.0));
        let order: Vec<_> = set.epochs.iter().map(|e| (e.trial, e.segment)).collect();
        assert_eq!(order[0], (1, 1));
        assert_eq!(order[29], (1, 30));
        assert_eq!(order[30], (2, 1));
        assert_eq!(order[149], (5, 30));
    }

    #[test]
    fn process_condition_errors() {
        assert_eq!(
            process_condition(
                1,
                Condition::new(7.0, 50.0),
                &[],
                &PipelineConfig::default()
            ),
            Err(PipelineError::NoTrials)
        );
        let a = series(vec![0.0; 3840]);
        let b = SampleSeries::new(vec![0.0; 3840], 256.0, "O2").unwrap();
        assert_eq!(
            process_condition(
                1,
                Condition::new(7.0, 50.0),
                &[a, b],
                &PipelineConfig::default()
            ),
            Err(PipelineError::MixedSampleRates)
        );
    }
}
