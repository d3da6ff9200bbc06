use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("sample rate must be positive and finite, got {0}")]
    BadSampleRate(f64),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
}

/// A uniformly sampled single-channel signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSeries {
    values: Vec<f64>,
    sample_rate_hz: f64,
    label: String,
}

impl SampleSeries {
    pub fn new(
        values: Vec<f64>,
        sample_rate_hz: f64,
        label: impl Into<String>,
    ) -> Result<Self, SeriesError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(SeriesError::BadSampleRate(sample_rate_hz));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite(i));
        }
        Ok(Self {
            values,
            sample_rate_hz,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.values.len() as f64 / self.sample_rate_hz
    }

    /// Same rate and label, new values. Values must be finite.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            values,
            sample_rate_hz: self.sample_rate_hz,
            label: self.label.clone(),
        }
    }
}
