//! Duty-cycle response surface planted by the simulator.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::reference::REFERENCE_AVERAGES;
use super::SimError;
use crate::condition::Condition;
use crate::{DEFAULT_DUTIES_PCT, DEFAULT_FREQUENCIES_HZ};

/// Target per-epoch peak FFT amplitude (device units) for each condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseModel {
    entries: Vec<(Condition, f64)>,
}

#[derive(Debug, Deserialize, Serialize)]
struct ModelRow {
    frequency_hz: f64,
    duty_pct: f64,
    amplitude: f64,
}

impl ResponseModel {
    /// Amplitudes must be positive and finite; conditions unique.
    pub fn new(entries: Vec<(Condition, f64)>) -> Result<Self, SimError> {
        if entries.is_empty() {
            return Err(SimError::Model("no entries".into()));
        }
        for (i, (c, a)) in entries.iter().enumerate() {
            if !(a.is_finite() && *a > 0.0) {
                return Err(SimError::Model(format!(
                    "amplitude {a} for {c} is not positive"
                )));
            }
            if !(c.frequency_hz.is_finite() && c.frequency_hz > 0.0)
                || !(c.duty_pct > 0.0 && c.duty_pct < 100.0)
            {
                return Err(SimError::Model(format!("invalid condition {c}")));
            }
            if entries[..i].iter().any(|(other, _)| other == c) {
                return Err(SimError::Model(format!("duplicate condition {c}")));
            }
        }
        Ok(Self { entries })
    }

    /// Across-subject mean of the reference per-subject averages.
    pub fn reference_pooled() -> Self {
        let mut entries = Vec::with_capacity(20);
        for (fi, f) in DEFAULT_FREQUENCIES_HZ.iter().enumerate() {
            for (di, d) in DEFAULT_DUTIES_PCT.iter().enumerate() {
                let sum: f64 = REFERENCE_AVERAGES.iter().map(|s| s[fi][di]).sum();
                entries.push((
                    Condition::new(*f, *d),
                    sum / REFERENCE_AVERAGES.len() as f64,
                ));
            }
        }
        Self { entries }
    }

    /// Reference averages of one subject (1-based, 1..=10).
    pub fn reference_subject(subject: usize) -> Option<Self> {
        let table = REFERENCE_AVERAGES.get(subject.checked_sub(1)?)?;
        let mut entries = Vec::with_capacity(20);
        for (fi, f) in DEFAULT_FREQUENCIES_HZ.iter().enumerate() {
            for (di, d) in DEFAULT_DUTIES_PCT.iter().enumerate() {
                entries.push((Condition::new(*f, *d), table[fi][di]));
            }
        }
        Some(Self { entries })
    }

    pub fn amplitude(&self, condition: &Condition) -> Option<f64> {
        self.entries
            .iter()
            .find(|(c, _)| c == condition)
            .map(|(_, a)| *a)
    }

    pub fn entries(&self) -> &[(Condition, f64)] {
        &self.entries
    }

    /// Every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, SimError> {
        Self::new(self.entries.iter().map(|(c, a)| (*c, a * factor)).collect())
    }

    /// Duty cycle with the largest amplitude at `frequency_hz`.
    pub fn peak_duty(&self, frequency_hz: f64) -> Option<f64> {
        let key = crate::condition::milli_key(frequency_hz);
        self.entries
            .iter()
            .filter(|(c, _)| crate::condition::milli_key(c.frequency_hz) == key)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c.duty_pct)
    }

    /// Reads `frequency_hz,duty_pct,amplitude` rows (header required).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, SimError> {
        let mut entries = Vec::new();
        for row in csv::Reader::from_reader(reader).deserialize::<ModelRow>() {
            let row = row.map_err(|e| SimError::Model(e.to_string()))?;
            entries.push((
                Condition::new(row.frequency_hz, row.duty_pct),
                row.amplitude,
            ));
        }
        Self::new(entries)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (c, a) in &self.entries {
            w.serialize(ModelRow {
                frequency_hz: c.frequency_hz,
                duty_pct: c.duty_pct,
                amplitude: *a,
            })
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

impl Default for ResponseModel {
    fn default() -> Self {
        Self::reference_pooled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooled_defaults_peak_at_85() {
        let m = ResponseModel::default();
        assert_eq!(m.entries().len(), 20);
        for f in DEFAULT_FREQUENCIES_HZ {
            assert_eq!(m.peak_duty(f), Some(85.0), "{f} Hz");
        }
        let a = m.amplitude(&Condition::new(7.0, 85.0)).unwrap();
        assert!((a - 558.44).abs() < 1e-9, "{a}");
        assert!(m.entries().iter().all(|(_, a)| *a > 0.0));
    }

    #[test]
    fn subject_tables() {
        let s1 = ResponseModel::reference_subject(1).unwrap();
        assert_eq!(s1.amplitude(&Condition::new(7.0, 85.0)), Some(562.8));
        assert_eq!(s1.amplitude(&Condition::new(7.0, 95.0)), Some(417.4));
        assert!(ResponseModel::reference_subject(0).is_none());
        assert!(ResponseModel::reference_subject(11).is_none());
    }

    #[test]
    fn csv_round_trip() {
        let m = ResponseModel::default();
        assert_eq!(ResponseModel::from_csv(m.to_csv().as_bytes()).unwrap(), m);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let cases = [
            "frequency_hz,duty_pct,amplitude\n7,85,-1\n",
            "frequency_hz,duty_pct,amplitude\n7,85,abc\n",
            "frequency_hz,duty_pct,amplitude\n7,85,10\n7,85,11\n",
            "frequency_hz,duty_pct,amplitude\n7,100,10\n",
            "frequency_hz,duty_pct,amplitude\n",
        ];
        for c in cases {
            assert!(ResponseModel::from_csv(c.as_bytes()).is_err(), "{c}");
        }
    }
}
