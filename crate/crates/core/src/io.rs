//! Amplitude tables and batch analysis of recording directories.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::condition::{Condition, TrialId};
use crate::edf::{extract_channel, parse_edf, EdfError};
use crate::pipeline::{
    process_condition, AmplitudeSet, EpochAmplitude, PipelineConfig, PipelineError,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },
    #[error("{path}: {source}")]
    Edf { path: PathBuf, source: EdfError },
    #[error("{path}: {source}")]
    Pipeline {
        path: PathBuf,
        source: PipelineError,
    },
    #[error("{0}: name does not follow S<subject>_f<freq>_d<duty>_t<trial>.edf")]
    BadFileName(PathBuf),
    #[error("{0}: trial listed twice")]
    DuplicateTrial(PathBuf),
    #[error("no recordings found")]
    NoRecordings,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// One line of an amplitude table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub subject: u32,
    pub frequency_hz: f64,
    pub duty_pct: f64,
    pub trial: u32,
    pub segment: u32,
    pub amplitude: f64,
}

/// Writes `subject,frequency_hz,duty_pct,trial,segment,amplitude`.
pub fn write_amplitudes_csv<W: Write>(out: W, sets: &[AmplitudeSet]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    for set in sets {
        for e in &set.epochs {
            w.serialize(AmplitudeRow {
                subject: set.subject,
                frequency_hz: set.condition.frequency_hz,
                duty_pct: set.condition.duty_pct,
                trial: e.trial,
                segment: e.segment,
                amplitude: e.amplitude,
            })?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_amplitudes_csv<R: Read>(input: R) -> Result<Vec<AmplitudeRow>, IoError> {
    let mut rows = Vec::new();
    for (i, row) in csv::Reader::from_reader(input)
        .deserialize::<AmplitudeRow>()
        .enumerate()
    {
        let row = row?;
        let bad = |reason: &str| IoError::InvalidRow {
            row: i + 1,
            reason: reason.to_string(),
        };
        if !(row.amplitude.is_finite() && row.amplitude >= 0.0) {
            return Err(bad("amplitude must be finite and non-negative"));
        }
        if !(row.frequency_hz.is_finite() && row.frequency_hz > 0.0) {
            return Err(bad("frequency must be positive"));
        }
        if !row.duty_pct.is_finite() {
            return Err(bad("duty must be finite"));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Groups rows by (subject, condition), keeping row order within a group.
pub fn rows_to_sets(rows: &[AmplitudeRow]) -> Vec<AmplitudeSet> {
    let mut groups: BTreeMap<(u32, Condition), Vec<EpochAmplitude>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.subject, Condition::new(r.frequency_hz, r.duty_pct)))
            .or_default()
            .push(EpochAmplitude {
                trial: r.trial,
                segment: r.segment,
                peak_hz: None,
                amplitude: r.amplitude,
            });
    }
    groups
        .into_iter()
        .map(|((subject, condition), epochs)| AmplitudeSet {
            subject,
            condition,
            epochs,
        })
        .collect()
}

/// Expands directories (non-recursively) into their `.edf` files, sorted by name.
pub fn collect_edf_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, IoError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let entries = fs::read_dir(p).map_err(|source| IoError::Io {
                path: p.clone(),
                source,
            })?;
            let mut found = Vec::new();
            for entry in entries {
                let entry = entry.map_err(|source| IoError::Io {
                    path: p.clone(),
                    source,
                })?;
                let path = entry.path();
                if path
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("edf"))
                {
                    found.push(path);
                }
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Analyses trial recordings named by [`TrialId::file_name`]. Trials of the
/// same subject and condition are processed together in trial order. With
/// `frequency_hz` set, only recordings at that stimulus frequency are used.
pub fn analyze_paths(
    paths: &[PathBuf],
    channel: &str,
    frequency_hz: Option<f64>,
    config: &PipelineConfig,
) -> Result<Vec<AmplitudeSet>, IoError> {
    let mut groups: BTreeMap<(u32, Condition), Vec<(u32, PathBuf)>> = BTreeMap::new();
    for p in paths {
        let id = p
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(TrialId::parse_file_name)
            .ok_or_else(|| IoError::BadFileName(p.clone()))?;
        if let Some(f) = frequency_hz {
            if Condition::new(f, 0.0).key().0 != id.condition.key().0 {
                continue;
            }
        }
        let trials = groups.entry((id.subject, id.condition)).or_default();
        if trials.iter().any(|(t, _)| *t == id.trial) {
            return Err(IoError::DuplicateTrial(p.clone()));
        }
        trials.push((id.trial, p.clone()));
    }
    if groups.is_empty() {
        return Err(IoError::NoRecordings);
    }
    let groups: Vec<_> = groups.into_iter().collect();
    groups
        .par_iter()
        .map(|((subject, condition), trials)| {
            let mut trials = trials.clone();
            trials.sort_by_key(|(t, _)| *t);
            let mut epochs = Vec::new();
            for (trial, path) in &trials {
                let series = read_channel(path, channel)?;
                let set = process_condition(*subject, *condition, &[series], config).map_err(
                    |source| IoError::Pipeline {
                        path: path.clone(),
                        source,
                    },
                )?;
                epochs.extend(
                    set.epochs
                        .into_iter()
                        .map(|e| EpochAmplitude { trial: *trial, ..e }),
                );
            }
            Ok(AmplitudeSet {
                subject: *subject,
                condition: *condition,
                epochs,
            })
        })
        .collect()
}

fn read_channel(path: &Path, channel: &str) -> Result<crate::SampleSeries, IoError> {
    let bytes = fs::read(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let edf_err = |source| IoError::Edf {
        path: path.to_path_buf(),
        source,
    };
    let rec = parse_edf(&bytes).map_err(edf_err)?;
    extract_channel(&rec, channel).map_err(edf_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> AmplitudeSet {
        AmplitudeSet {
            subject: 2,
            condition: Condition::new(7.0, 85.0),
            epochs: vec![
                EpochAmplitude {
                    trial: 1,
                    segment: 1,
                    peak_hz: Some(7.0),
                    amplitude: 512.25,
                },
                EpochAmplitude {
                    trial: 1,
                    segment: 2,
                    peak_hz: Some(7.0),
                    amplitude: 0.1 + 0.2,
                },
            ],
        }
    }

    #[test]
    fn csv_format_and_round_trip() {
        let mut buf = Vec::new();
        write_amplitudes_csv(&mut buf, &[sample_set()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(
            text.starts_with(
                "subject,frequency_hz,duty_pct,trial,segment,amplitude\n2,7.0,85.0,1,1,512.25\n"
            ),
            "{text}"
        );
        let rows = read_amplitudes_csv(buf.as_slice()).unwrap();
        assert_eq!(rows[1].amplitude, 0.1 + 0.2);
        let sets = rows_to_sets(&rows);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].amplitudes(), sample_set().amplitudes());
    }

    #[test]
    fn rejects_bad_rows() {
        let header = "subject,frequency_hz,duty_pct,trial,segment,amplitude\n";
        for row in [
            "1,7,85,1,1,-2\n",
            "1,7,85,1,1,NaN\n",
            "1,0,85,1,1,2\n",
            "1,7,85,1,x,2\n",
            "1,7,85\n",
        ] {
            let text = format!("{header}{row}");
            assert!(read_amplitudes_csv(text.as_bytes()).is_err(), "{row}");
        }
    }

    #[test]
    fn grouping_sorts_by_subject_then_condition() {
        let row = |subject, f, d| AmplitudeRow {
            subject,
            frequency_hz: f,
            duty_pct: d,
            trial: 1,
            segment: 1,
            amplitude: 1.0,
        };
        let sets = rows_to_sets(&[
            row(2, 7.0, 50.0),
            row(1, 8.0, 50.0),
            row(1, 7.0, 95.0),
            row(1, 7.0, 50.0),
        ]);
        let keys: Vec<_> = sets
            .iter()
            .map(|s| (s.subject, s.condition.frequency_hz, s.condition.duty_pct))
            .collect();
        assert_eq!(
            keys,
            vec![
                (1, 7.0, 50.0),
                (1, 7.0, 95.0),
                (1, 8.0, 50.0),
                (2, 7.0, 50.0)
            ]
        );
    }

    #[test]
    fn analyze_rejects_foreign_names() {
        let err = analyze_paths(
            &[PathBuf::from("recording.edf")],
            "O2",
            None,
            &PipelineConfig::default(),
        );
        assert!(matches!(err, Err(IoError::BadFileName(_))));
        assert!(matches!(
            analyze_paths(&[], "O2", None, &PipelineConfig::default()),
            Err(IoError::NoRecordings)
        ));
    }
}
