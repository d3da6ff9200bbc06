//! Subject comfort ratings (1 = least, 10 = most comfortable).

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::condition::{milli_key, Condition};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortRating {
    pub subject: u32,
    pub frequency_hz: f64,
    pub duty_pct: f64,
    pub rating: u8,
}

/// Validated ratings: each within 1..=10, one per (subject, frequency, duty).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComfortRatings {
    ratings: Vec<ComfortRating>,
}

impl ComfortRatings {
    pub fn new(ratings: Vec<ComfortRating>) -> Result<Self, ProtocolError> {
        let mut seen = std::collections::BTreeSet::new();
        for (i, r) in ratings.iter().enumerate() {
            if !(1..=10).contains(&r.rating) {
                return Err(ProtocolError::Comfort {
                    row: i + 1,
                    reason: format!("rating {} outside 1..=10", r.rating),
                });
            }
            if !(r.frequency_hz.is_finite() && r.duty_pct.is_finite()) {
                return Err(ProtocolError::Comfort {
                    row: i + 1,
                    reason: "non-finite frequency or duty".into(),
                });
            }
            let key = (r.subject, Condition::new(r.frequency_hz, r.duty_pct));
            if !seen.insert(key) {
                return Err(ProtocolError::Comfort {
                    row: i + 1,
                    reason: "duplicate rating".into(),
                });
            }
        }
        Ok(Self { ratings })
    }

    /// Reads `subject,frequency_hz,duty_pct,rating`.
    pub fn from_csv<R: Read>(input: R) -> Result<Self, ProtocolError> {
        let mut ratings = Vec::new();
        for (i, row) in csv::Reader::from_reader(input)
            .deserialize::<ComfortRating>()
            .enumerate()
        {
            ratings.push(row.map_err(|e| ProtocolError::Comfort {
                row: i + 1,
                reason: e.to_string(),
            })?);
        }
        Self::new(ratings)
    }

    pub fn ratings(&self) -> &[ComfortRating] {
        &self.ratings
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DutyComfort {
    pub duty_pct: f64,
    pub mean_rating: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComfortSummary {
    /// Ascending by duty.
    pub per_duty: Vec<DutyComfort>,
    /// Whether mean comfort never drops as duty increases. Informational only.
    pub non_decreasing: bool,
}

/// Mean rating per duty across subjects and frequencies.
pub fn aggregate_comfort(ratings: &ComfortRatings) -> ComfortSummary {
    let mut by_duty: BTreeMap<i64, (f64, f64, usize)> = BTreeMap::new();
    for r in &ratings.ratings {
        let e = by_duty
            .entry(milli_key(r.duty_pct))
            .or_insert((r.duty_pct, 0.0, 0));
        e.1 += r.rating as f64;
        e.2 += 1;
    }
    let per_duty: Vec<DutyComfort> = by_duty
        .into_values()
        .map(|(duty_pct, sum, n)| DutyComfort {
            duty_pct,
            mean_rating: sum / n as f64,
            n,
        })
        .collect();
    let non_decreasing = per_duty
        .windows(2)
        .all(|w| w[1].mean_rating >= w[0].mean_rating);
    ComfortSummary {
        per_duty,
        non_decreasing,
    }
}
