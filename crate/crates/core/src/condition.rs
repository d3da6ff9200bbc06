//! Identifiers for experimental conditions and trials.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Stimulus frequencies and duty cycles are compared on a 10⁻³ grid.
pub fn milli_key(x: f64) -> i64 {
    (x * 1000.0).round() as i64
}

/// Formats a frequency or duty value compactly: `7`, `7.5`, `85`.
pub fn format_quantity(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// A (frequency, duty cycle) stimulus condition.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Condition {
    pub frequency_hz: f64,
    pub duty_pct: f64,
}

impl Condition {
    pub fn new(frequency_hz: f64, duty_pct: f64) -> Self {
        Self {
            frequency_hz,
            duty_pct,
        }
    }

    pub fn key(&self) -> (i64, i64) {
        (milli_key(self.frequency_hz), milli_key(self.duty_pct))
    }
}

impl PartialEq for Condition {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Condition {}

impl PartialOrd for Condition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Condition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl std::hash::Hash for Condition {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} Hz / {}%",
            format_quantity(self.frequency_hz),
            format_quantity(self.duty_pct)
        )
    }
}

/// One recorded trial: who, what stimulus, which repetition (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrialId {
    pub subject: u32,
    pub condition: Condition,
    pub trial: u32,
}

impl TrialId {
    /// File name of the trial recording: `S<subject>_f<freq>_d<duty>_t<trial>.edf`.
    pub fn file_name(&self) -> String {
        format!(
            "S{}_f{}_d{}_t{}.edf",
            self.subject,
            format_quantity(self.condition.frequency_hz),
            format_quantity(self.condition.duty_pct),
            self.trial
        )
    }

    /// Inverse of [`TrialId::file_name`]; `None` when the name does not follow the scheme.
    pub fn parse_file_name(name: &str) -> Option<Self> {
        let stem = name
            .strip_suffix(".edf")
            .or_else(|| name.strip_suffix(".EDF"))?;
        let mut parts = stem.split('_');
        let subject = parts.next()?.strip_prefix('S')?.parse().ok()?;
        let freq: f64 = parts.next()?.strip_prefix('f')?.parse().ok()?;
        let duty: f64 = parts.next()?.strip_prefix('d')?.parse().ok()?;
        let trial = parts.next()?.strip_prefix('t')?.parse().ok()?;
        if parts.next().is_some() || !freq.is_finite() || !duty.is_finite() {
            return None;
        }
        Some(Self {
            subject,
            condition: Condition::new(freq, duty),
            trial,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_name_scheme() {
        let id = TrialId {
            subject: 3,
            condition: Condition::new(7.0, 85.0),
            trial: 2,
        };
        assert_eq!(id.file_name(), "S3_f7_d85_t2.edf");
        assert_eq!(TrialId::parse_file_name("S3_f7_d85_t2.edf"), Some(id));

        let frac = TrialId {
            subject: 1,
            condition: Condition::new(7.5, 82.5),
            trial: 1,
        };
        assert_eq!(frac.file_name(), "S1_f7.5_d82.5_t1.edf");
        assert_eq!(TrialId::parse_file_name(&frac.file_name()), Some(frac));
    }

    #[test]
    fn rejects_foreign_names() {
        for name in [
            "notes.txt",
            "S1_f7_d85.edf",
            "X1_f7_d85_t1.edf",
            "S1_f7_d85_t1_x.edf",
            "S1_fnan_d85_t1.edf",
        ] {
            assert_eq!(TrialId::parse_file_name(name), None, "{name}");
        }
    }
}
