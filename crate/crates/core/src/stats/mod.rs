//! Rank statistics over duty-cycle groups.

mod chi2;
mod kruskal;
mod rank;
mod summary;

pub use chi2::{chi_square_sf, chi_square_sf_even, TailProbability};
pub use kruskal::{kruskal_wallis, GroupStats, GroupedAmplitudes, KwResult};
pub use rank::rank_with_ties;
pub use summary::{mean, summarize_group};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no values")]
    Empty,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("standard deviation needs at least 2 values, got {0}")]
    TooFewForSd(usize),
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(f64),
    #[error("group label {0} appears twice")]
    DuplicateLabel(f64),
    #[error("need at least 3 observations, got {0}")]
    TooFewObservations(usize),
    #[error("chi-square statistic must be non-negative, got {0}")]
    NegativeChiSquare(f64),
    #[error("degrees of freedom must be positive")]
    BadDegreesOfFreedom,
}

/// Duty cycle with the highest mean rank at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestDuty {
    pub frequency_hz: f64,
    pub duty_pct: f64,
    pub mean_rank: f64,
    /// Another group shares the maximal mean rank exactly; the first listed was chosen.
    pub tie: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestDutySelection {
    pub per_frequency: Vec<BestDuty>,
}

impl BestDutySelection {
    pub fn duty_for(&self, frequency_hz: f64) -> Option<f64> {
        let key = crate::condition::milli_key(frequency_hz);
        self.per_frequency
            .iter()
            .find(|b| crate::condition::milli_key(b.frequency_hz) == key)
            .map(|b| b.duty_pct)
    }
}

/// Argmax of mean rank for one result.
pub fn best_duty(frequency_hz: f64, result: &KwResult) -> Option<BestDuty> {
    let first = result.groups.first()?;
    let mut best = BestDuty {
        frequency_hz,
        duty_pct: first.duty_pct,
        mean_rank: first.mean_rank,
        tie: false,
    };
    for g in &result.groups[1..] {
        if g.mean_rank > best.mean_rank {
            best.duty_pct = g.duty_pct;
            best.mean_rank = g.mean_rank;
            best.tie = false;
        } else if g.mean_rank == best.mean_rank {
            best.tie = true;
        }
    }
    Some(best)
}

pub fn select_best_duty(results: &[(f64, KwResult)]) -> BestDutySelection {
    BestDutySelection {
        per_frequency: results
            .iter()
            .filter_map(|(f, r)| best_duty(*f, r))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_mean_ranks(ranks: &[f64]) -> KwResult {
        KwResult {
            h_statistic: 0.0,
            df: ranks.len() as u32 - 1,
            p_value: 1.0,
            p_underflow: false,
            n_total: 150 * ranks.len(),
            tie_correction: 1.0,
            groups: ranks
                .iter()
                .zip(crate::DEFAULT_DUTIES_PCT)
                .map(|(&r, d)| GroupStats {
                    duty_pct: d,
                    n: 150,
                    rank_sum: r * 150.0,
                    mean_rank: r,
                    mean: 0.0,
                    sd: None,
                })
                .collect(),
        }
    }

    #[test]
    fn table_row_selects_85() {
        let r = with_mean_ranks(&[387.1, 387.3, 649.2, 377.4, 76.5]);
        let sel = select_best_duty(&[(7.0, r)]);
        assert_eq!(sel.per_frequency[0].duty_pct, 85.0);
        assert!(!sel.per_frequency[0].tie);
        assert_eq!(sel.duty_for(7.0), Some(85.0));
        assert_eq!(sel.duty_for(8.0), None);
    }

    #[test]
    fn all_equal_flags_tie_and_takes_first() {
        let r = with_mean_ranks(&[375.5; 5]);
        let b = best_duty(9.0, &r).unwrap();
        assert_eq!(b.duty_pct, 50.0);
        assert!(b.tie);
    }

    #[test]
    fn later_strict_max_clears_tie() {
        let r = with_mean_ranks(&[10.0, 10.0, 30.0, 5.0, 1.0]);
        let b = best_duty(9.0, &r).unwrap();
        assert_eq!(b.duty_pct, 85.0);
        assert!(!b.tie);
    }
}
