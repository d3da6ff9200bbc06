//! Per-epoch FFT peak amplitude.
//!
//! Convention: rectangular window, unnormalized forward DFT, magnitude
//! `|X[k]|`. A bin-aligned sinusoid of amplitude `A` in an `N`-point epoch
//! therefore peaks at `A·N/2`. DC and Nyquist are excluded from the search.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::{Epoch, PipelineError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPeak {
    pub bin: usize,
    pub frequency_hz: f64,
    pub amplitude: f64,
}

/// Reusable FFT plan for epochs of one length.
pub struct PeakFinder {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PeakFinder {
    pub fn new(len: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(len);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Self {
            len,
            fft,
            buf: vec![Complex64::default(); len],
            scratch,
        }
    }

    /// Largest non-DC, non-Nyquist magnitude; the lowest bin wins ties.
    pub fn peak(
        &mut self,
        samples: &[f64],
        sample_rate_hz: f64,
    ) -> Result<SpectralPeak, PipelineError> {
        if samples.len() != self.len {
            return Err(PipelineError::EpochLength {
                expected: self.len,
                actual: samples.len(),
            });
        }
        if self.len < 3 {
            return Err(PipelineError::EpochLength {
                expected: 3,
                actual: self.len,
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(PipelineError::NonFinite(i));
        }
        for (b, &x) in self.buf.iter_mut().zip(samples) {
            *b = Complex64::new(x, 0.0);
        }
        self.fft
            .process_with_scratch(&mut self.buf, &mut self.scratch);

        let last = self.len.div_ceil(2) - 1;
        let (bin, amplitude) = (1..=last).map(|k| (k, self.buf[k].norm())).fold(
            (1, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
        Ok(SpectralPeak {
            bin,
            frequency_hz: bin as f64 * sample_rate_hz / self.len as f64,
            amplitude,
        })
    }
}

pub fn fft_max_amplitude(epoch: &Epoch) -> Result<SpectralPeak, PipelineError> {
    PeakFinder::new(epoch.samples.len()).peak(&epoch.samples, epoch.sample_rate_hz)
}
