//! Background EEG noise: 1/f ("pink") noise by spectral shaping of white noise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::SimError;

pub fn white_noise<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Zero-mean, unit-variance noise whose power spectrum falls as 1/f.
/// The DC bin is removed; every other bin of the white spectrum is scaled
/// by `1/√k`.
pub fn pink_noise<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut spectrum: Vec<Complex64> = white_noise(n, rng)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spectrum);
    spectrum[0] = Complex64::default();
    for (k, c) in spectrum.iter_mut().enumerate().skip(1) {
        *c /= (k.min(n - k) as f64).sqrt();
    }
    planner.plan_fft_inverse(n).process(&mut spectrum);

    let values: Vec<f64> = spectrum.iter().map(|c| c.re).collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return vec![0.0; n];
    }
    values.into_iter().map(|v| (v - mean) / sd).collect()
}

pub fn gen_pink_noise(n: usize, seed: u64) -> Result<Vec<f64>, SimError> {
    if n == 0 {
        return Err(SimError::EmptyNoise);
    }
    Ok(pink_noise(n, &mut ChaCha8Rng::seed_from_u64(seed)))
}
