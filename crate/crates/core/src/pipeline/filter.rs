//! Butterworth band-pass design (bilinear transform) and zero-phase filtering.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::series::SampleSeries;

/// Filtered signals must be at least this many seconds long per unit of order.
pub const WARMUP_S_PER_ORDER: f64 = 0.75;
/// Minimum wrap-around padding applied on each side before filtering.
const MIN_PAD_S: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
    /// Order of the low-pass prototype; the band-pass has twice as many poles.
    pub order: usize,
    pub zero_phase: bool,
}

impl FilterSpec {
    /// 2 Hz wide, order 4, zero phase.
    pub fn centered(center_hz: f64) -> Self {
        Self {
            center_hz,
            bandwidth_hz: 2.0,
            order: 4,
            zero_phase: true,
        }
    }

    pub fn low_hz(&self) -> f64 {
        self.center_hz - self.bandwidth_hz / 2.0
    }

    pub fn high_hz(&self) -> f64 {
        self.center_hz + self.bandwidth_hz / 2.0
    }

    /// Shortest series the filter accepts.
    pub fn min_duration_s(&self) -> f64 {
        WARMUP_S_PER_ORDER * self.order as f64
    }
}

/// One second-order section, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2)
            / (1.0 + self.a[0] * z_inv + self.a[1] * z2)
    }

    /// Direct form II transposed, zero initial state.
    fn run(&self, data: &mut [f64]) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for x in data.iter_mut() {
            let y = self.b[0] * *x + s1;
            s1 = self.b[1] * *x - self.a[0] * y + s2;
            s2 = self.b[2] * *x - self.a[1] * y;
            *x = y;
        }
    }
}

/// A designed band-pass filter for one sample rate.
#[derive(Debug, Clone)]
pub struct Bandpass {
    spec: FilterSpec,
    sample_rate_hz: f64,
    sections: Vec<Biquad>,
}

impl Bandpass {
    pub fn design(spec: FilterSpec, sample_rate_hz: f64) -> Result<Self, PipelineError> {
        let nyquist = sample_rate_hz / 2.0;
        let (lo, hi) = (spec.low_hz(), spec.high_hz());
        if !(spec.bandwidth_hz > 0.0 && lo > 0.0 && hi < nyquist && spec.center_hz.is_finite()) {
            return Err(PipelineError::BandOutOfRange {
                low_hz: lo,
                high_hz: hi,
                nyquist_hz: nyquist,
            });
        }
        if spec.order == 0 {
            return Err(PipelineError::BadFilterOrder(spec.order));
        }

        let fs2 = 2.0 * sample_rate_hz;
        let w_lo = fs2 * (PI * lo / sample_rate_hz).tan();
        let w_hi = fs2 * (PI * hi / sample_rate_hz).tan();
        let w0_sq = w_lo * w_hi;
        let bw = w_hi - w_lo;

        let n = spec.order;
        let mut sections = Vec::with_capacity(n);
        for k in 0..n {
            let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            let proto = Complex64::from_polar(1.0, theta);
            let half = proto * (bw / 2.0);
            let root = (half * half - w0_sq).sqrt();
            for s in [half + root, half - root] {
                let z = (fs2 + s) / (fs2 - s);
                // Conjugate partners come from the mirrored prototype pole.
                if z.im > 0.0 {
                    sections.push(Biquad {
                        b: [1.0, 0.0, -1.0],
                        a: [-2.0 * z.re, z.norm_sqr()],
                    });
                }
            }
        }
        debug_assert_eq!(sections.len(), n);

        let mut filter = Self {
            spec,
            sample_rate_hz,
            sections,
        };
        let gain = filter.gain_at(spec.center_hz);
        let per_section = gain.powf(-1.0 / n as f64);
        for s in filter.sections.iter_mut() {
            for b in s.b.iter_mut() {
                *b *= per_section;
            }
        }
        Ok(filter)
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    /// Magnitude of a single forward pass at `freq_hz`.
    pub fn gain_at(&self, freq_hz: f64) -> f64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / self.sample_rate_hz);
        self.sections
            .iter()
            .map(|s| s.response(z_inv))
            .product::<Complex64>()
            .norm()
    }

    /// Magnitude of the whole operation: squared in zero-phase mode.
    pub fn effective_gain_at(&self, freq_hz: f64) -> f64 {
        let g = self.gain_at(freq_hz);
        if self.spec.zero_phase {
            g * g
        } else {
            g
        }
    }

    fn run(&self, data: &mut [f64]) {
        for s in &self.sections {
            s.run(data);
        }
    }

    /// Filters `values`. The signal is extended periodically on both sides so
    /// start-up transients settle before the first real sample; periodic
    /// signals whose period divides the length are filtered as if infinite.
    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>, PipelineError> {
        let n = values.len();
        let min_len = (self.spec.min_duration_s() * self.sample_rate_hz).ceil() as usize;
        if n < min_len.max(1) {
            return Err(PipelineError::TooShortForFilter {
                samples: n,
                required: min_len.max(1),
            });
        }
        let pad = n.max((MIN_PAD_S * self.sample_rate_hz).ceil() as usize);
        let mut ext: Vec<f64> = (0..n + 2 * pad)
            .map(|i| values[(i + n - pad % n) % n])
            .collect();
        self.run(&mut ext);
        if self.spec.zero_phase {
            ext.reverse();
            self.run(&mut ext);
            ext.reverse();
        }
        Ok(ext[pad..pad + n].to_vec())
    }
}

pub fn bandpass(series: &SampleSeries, spec: &FilterSpec) -> Result<SampleSeries, PipelineError> {
    let filter = Bandpass::design(*spec, series.sample_rate_hz())?;
    Ok(series.with_values(filter.apply(series.values())?))
}
