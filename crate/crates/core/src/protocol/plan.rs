use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::condition::{milli_key, Condition};
use crate::{DEFAULT_DUTIES_PCT, DEFAULT_FREQUENCIES_HZ, DEFAULT_TRIAL_S};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub frequencies: Vec<f64>,
    pub duties: Vec<f64>,
    pub trials_per_condition: u32,
    pub trial_s: f64,
    pub rest_s: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            frequencies: DEFAULT_FREQUENCIES_HZ.to_vec(),
            duties: DEFAULT_DUTIES_PCT.to_vec(),
            trials_per_condition: 5,
            trial_s: DEFAULT_TRIAL_S,
            rest_s: 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTrial {
    pub condition: Condition,
    /// 1-based repetition index within the condition.
    pub trial: u32,
    /// Start of the trial on the session clock; a rest follows every trial but the last.
    pub start_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPlan {
    pub frequencies: Vec<f64>,
    pub duties: Vec<f64>,
    pub trials_per_condition: u32,
    pub trial_s: f64,
    pub rest_s: f64,
    pub seed: u64,
    pub schedule: Vec<ScheduledTrial>,
}

impl ProtocolPlan {
    /// Checks that every (frequency, duty) pair appears exactly
    /// `trials_per_condition` times, numbered 1..=n, and nothing else appears.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let expected =
            self.frequencies.len() * self.duties.len() * self.trials_per_condition as usize;
        if self.schedule.len() != expected {
            return Err(ProtocolError::Plan(format!(
                "schedule has {} entries, expected {expected}",
                self.schedule.len()
            )));
        }
        for &f in &self.frequencies {
            for &d in &self.duties {
                let c = Condition::new(f, d);
                let mut trials: Vec<u32> = self
                    .schedule
                    .iter()
                    .filter(|e| e.condition == c)
                    .map(|e| e.trial)
                    .collect();
                trials.sort_unstable();
                if trials != (1..=self.trials_per_condition).collect::<Vec<_>>() {
                    return Err(ProtocolError::Plan(format!("{c} has trials {trials:?}")));
                }
            }
        }
        Ok(())
    }

    /// Duty order used in the block for `frequency_hz`.
    pub fn duty_order(&self, frequency_hz: f64) -> Vec<f64> {
        let key = milli_key(frequency_hz);
        let mut order: Vec<f64> = Vec::new();
        for e in &self.schedule {
            if milli_key(e.condition.frequency_hz) == key
                && order.last().map(|d| milli_key(*d)) != Some(milli_key(e.condition.duty_pct))
            {
                order.push(e.condition.duty_pct);
            }
        }
        order
    }

    /// Writes `order,frequency_hz,duty_pct,trial,start_s`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        #[derive(Serialize)]
        struct Row {
            order: usize,
            frequency_hz: f64,
            duty_pct: f64,
            trial: u32,
            start_s: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (i, e) in self.schedule.iter().enumerate() {
            w.serialize(Row {
                order: i + 1,
                frequency_hz: e.condition.frequency_hz,
                duty_pct: e.condition.duty_pct,
                trial: e.trial,
                start_s: e.start_s,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_values(
    name: &str,
    values: &[f64],
    valid: impl Fn(f64) -> bool,
) -> Result<(), ProtocolError> {
    if values.is_empty() {
        return Err(ProtocolError::Plan(format!("no {name} given")));
    }
    for (i, v) in values.iter().enumerate() {
        if !valid(*v) {
            return Err(ProtocolError::Plan(format!("invalid {name} value {v}")));
        }
        if values[..i].iter().any(|w| milli_key(*w) == milli_key(*v)) {
            return Err(ProtocolError::Plan(format!(
                "{name} value {v} listed twice"
            )));
        }
    }
    Ok(())
}

/// Frequencies run in ascending order; within each frequency block the duty
/// order is a seeded shuffle and each duty's trials are consecutive.
pub fn plan_session(config: &PlanConfig, seed: u64) -> Result<ProtocolPlan, ProtocolError> {
    check_values("frequencies", &config.frequencies, |f| {
        f.is_finite() && f > 0.0
    })?;
    check_values("duties", &config.duties, |d| d > 0.0 && d < 100.0)?;
    if config.trials_per_condition == 0 {
        return Err(ProtocolError::Plan(
            "trials_per_condition must be at least 1".into(),
        ));
    }
    if !(config.trial_s.is_finite() && config.trial_s > 0.0) {
        return Err(ProtocolError::Plan("trial_s must be positive".into()));
    }
    if !(config.rest_s.is_finite() && config.rest_s >= 0.0) {
        return Err(ProtocolError::Plan("rest_s must be non-negative".into()));
    }

    let mut frequencies = config.frequencies.clone();
    frequencies.sort_by(f64::total_cmp);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut schedule = Vec::new();
    let mut clock = 0.0;
    for &f in &frequencies {
        let mut duties = config.duties.clone();
        duties.shuffle(&mut rng);
        for d in duties {
            for trial in 1..=config.trials_per_condition {
                schedule.push(ScheduledTrial {
                    condition: Condition::new(f, d),
                    trial,
                    start_s: clock,
                });
                clock += config.trial_s + config.rest_s;
            }
        }
    }
    Ok(ProtocolPlan {
        frequencies,
        duties: config.duties.clone(),
        trials_per_condition: config.trials_per_condition,
        trial_s: config.trial_s,
        rest_s: config.rest_s,
        seed,
        schedule,
    })
}
