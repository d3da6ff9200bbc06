//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! frequencies = 7, 8, 9, 10
//! duties = 50, 80, 85, 90, 95
//! trials = 5
//! trial_s = 30
//! rest_s = 60
//! seed = 1
//! noise_sd = 8
//! model_path = model.csv
//! ```
//!
//! Every key is optional; missing keys take their defaults.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PlanConfig, ProtocolError};
use crate::simulate::SimConfig;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub plan: PlanConfig,
    pub seed: u64,
    pub noise_sd: f64,
    pub model_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            plan: PlanConfig::default(),
            seed: DEFAULT_SEED,
            noise_sd: SimConfig::default().noise_sd,
            model_path: None,
        }
    }
}

fn parse_list(key: &str, value: &str, line: usize) -> Result<Vec<f64>, ProtocolError> {
    value
        .split(',')
        .map(|v| parse_num::<f64>(key, v, line))
        .collect()
}

fn parse_num<T: std::str::FromStr>(
    key: &str,
    value: &str,
    line: usize,
) -> Result<T, ProtocolError> {
    value.trim().parse().map_err(|_| ProtocolError::Config {
        line,
        reason: format!("`{key}`: cannot parse {:?}", value.trim()),
    })
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ProtocolError> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ProtocolError::Config {
                    line,
                    reason: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(ProtocolError::Config {
                    line,
                    reason: format!("`{key}` set twice"),
                });
            }
            seen.push(key.to_string());
            match key {
                "frequencies" => cfg.plan.frequencies = parse_list(key, value, line)?,
                "duties" => cfg.plan.duties = parse_list(key, value, line)?,
                "trials" => cfg.plan.trials_per_condition = parse_num(key, value, line)?,
                "trial_s" => cfg.plan.trial_s = parse_num(key, value, line)?,
                "rest_s" => cfg.plan.rest_s = parse_num(key, value, line)?,
                "seed" => cfg.seed = parse_num(key, value, line)?,
                "noise_sd" => cfg.noise_sd = parse_num(key, value, line)?,
                "model_path" => {
                    cfg.model_path = if value.is_empty() {
                        None
                    } else {
                        Some(PathBuf::from(value))
                    }
                }
                other => {
                    return Err(ProtocolError::Config {
                        line,
                        reason: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        Ok(cfg)
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s += &format!("frequencies = {}\n", join(&self.plan.frequencies));
        s += &format!("duties = {}\n", join(&self.plan.duties));
        s += &format!("trials = {}\n", self.plan.trials_per_condition);
        s += &format!("trial_s = {}\n", self.plan.trial_s);
        s += &format!("rest_s = {}\n", self.plan.rest_s);
        s += &format!("seed = {}\n", self.seed);
        s += &format!("noise_sd = {}\n", self.noise_sd);
        if let Some(p) = &self.model_path {
            s += &format!("model_path = {}\n", p.display());
        }
        s
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_text().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            noise_sd: self.noise_sd,
            seed: self.seed,
            trial_s: self.plan.trial_s,
            ..SimConfig::default()
        }
    }
}
