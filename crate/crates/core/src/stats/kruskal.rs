//! Tie-corrected Kruskal-Wallis H test.

use serde::{Deserialize, Serialize};

use super::chi2::chi_square_sf;
use super::rank::rank_and_tie_term;
use super::summary::{mean, summarize_group};
use super::StatsError;
use crate::condition::milli_key;

/// Amplitudes grouped by duty cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedAmplitudes {
    groups: Vec<(f64, Vec<f64>)>,
}

impl GroupedAmplitudes {
    /// At least two groups with distinct labels, none empty.
    pub fn new(groups: Vec<(f64, Vec<f64>)>) -> Result<Self, StatsError> {
        if groups.len() < 2 {
            return Err(StatsError::TooFewGroups(groups.len()));
        }
        for (i, (label, values)) in groups.iter().enumerate() {
            if values.is_empty() {
                return Err(StatsError::EmptyGroup(*label));
            }
            if groups[..i]
                .iter()
                .any(|(l, _)| milli_key(*l) == milli_key(*label))
            {
                return Err(StatsError::DuplicateLabel(*label));
            }
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[(f64, Vec<f64>)] {
        &self.groups
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|(_, v)| v.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub duty_pct: f64,
    pub n: usize,
    pub rank_sum: f64,
    pub mean_rank: f64,
    pub mean: f64,
    /// `None` for single-observation groups.
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwResult {
    pub h_statistic: f64,
    pub df: u32,
    pub p_value: f64,
    /// The p-value was below the smallest positive `f64` and is reported as 0.
    pub p_underflow: bool,
    pub n_total: usize,
    pub tie_correction: f64,
    pub groups: Vec<GroupStats>,
}

impl KwResult {
    pub fn mean_ranks(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.mean_rank).collect()
    }

    /// `|Σ n_j · mean_rank_j − N(N+1)/2| / (N(N+1)/2)`.
    pub fn rank_sum_residual(&self) -> f64 {
        let n = self.n_total as f64;
        let expected = n * (n + 1.0) / 2.0;
        let got: f64 = self.groups.iter().map(|g| g.n as f64 * g.mean_rank).sum();
        (got - expected).abs() / expected
    }
}

pub fn kruskal_wallis(data: &GroupedAmplitudes) -> Result<KwResult, StatsError> {
    let n_total = data.total();
    if n_total < 3 {
        return Err(StatsError::TooFewObservations(n_total));
    }
    let pooled: Vec<f64> = data
        .groups
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .collect();
    let (ranks, tie_term) = rank_and_tie_term(&pooled)?;

    let n = n_total as f64;
    let mut groups = Vec::with_capacity(data.groups.len());
    let mut weighted = 0.0;
    let mut offset = 0;
    for (label, values) in &data.groups {
        let rank_sum: f64 = ranks[offset..offset + values.len()].iter().sum();
        offset += values.len();
        let nj = values.len() as f64;
        weighted += rank_sum * rank_sum / nj;
        let (m, sd) = match summarize_group(values) {
            Ok((m, sd)) => (m, Some(sd)),
            Err(_) => (mean(values)?, None),
        };
        groups.push(GroupStats {
            duty_pct: *label,
            n: values.len(),
            rank_sum,
            mean_rank: rank_sum / nj,
            mean: m,
            sd,
        });
    }

    let df = (groups.len() - 1) as u32;
    let tie_correction = 1.0 - tie_term / (n * n * n - n);
    if tie_correction <= 0.0 {
        // Every observation identical.
        return Ok(KwResult {
            h_statistic: 0.0,
            df,
            p_value: 1.0,
            p_underflow: false,
            n_total,
            tie_correction: 0.0,
            groups,
        });
    }
    let h_raw = 12.0 / (n * (n + 1.0)) * weighted - 3.0 * (n + 1.0);
    let h = (h_raw / tie_correction).max(0.0);
    let tail = chi_square_sf(h, df)?;
    Ok(KwResult {
        h_statistic: h,
        df,
        p_value: tail.p,
        p_underflow: tail.underflow,
        n_total,
        tie_correction,
        groups,
    })
}
