//! Table- and figure-shaped summaries of amplitude sets.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::comfort::{aggregate_comfort, ComfortRatings, ComfortSummary};
use super::ProtocolError;
use crate::condition::{milli_key, Condition};
use crate::pipeline::AmplitudeSet;
use crate::stats::{
    best_duty, kruskal_wallis, BestDuty, BestDutySelection, GroupedAmplitudes, KwResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub n: usize,
}

/// Quantile by linear interpolation between order statistics of sorted data:
/// position `(n − 1)·q`.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats, ProtocolError> {
    if values.is_empty() {
        return Err(ProtocolError::EmptyBox);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ProtocolError::Plan(
            "box statistics need finite values".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(BoxStats {
        median: quantile_sorted(&sorted, 0.5),
        q25: quantile_sorted(&sorted, 0.25),
        q75: quantile_sorted(&sorted, 0.75),
        n: sorted.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// One test per (subject, frequency).
    Subject,
    /// One test per frequency over all subjects.
    Pooled,
}

/// One Kruskal-Wallis test across duty cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    /// `None` for pooled analyses.
    pub subject: Option<u32>,
    pub frequency_hz: f64,
    pub kw: KwResult,
    pub best: BestDuty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub scope: Scope,
    pub analyses: Vec<Analysis>,
}

/// Groups amplitude sets by subject (or not) and frequency, then tests across
/// duties in ascending duty order. Pooled groups concatenate subjects in
/// ascending order.
pub fn analyze_sets(sets: &[AmplitudeSet], scope: Scope) -> Result<StatsReport, ProtocolError> {
    // (subject or None, frequency key) -> duty key -> (duty, values)
    type Groups = BTreeMap<(Option<u32>, i64), (f64, BTreeMap<i64, (f64, Vec<f64>)>)>;
    let mut sorted: Vec<&AmplitudeSet> = sets.iter().collect();
    sorted.sort_by_key(|s| (s.subject, s.condition));
    let mut groups: Groups = BTreeMap::new();
    for set in sorted {
        let subject = match scope {
            Scope::Subject => Some(set.subject),
            Scope::Pooled => None,
        };
        let f = set.condition.frequency_hz;
        let entry = groups
            .entry((subject, milli_key(f)))
            .or_insert((f, BTreeMap::new()));
        entry
            .1
            .entry(milli_key(set.condition.duty_pct))
            .or_insert((set.condition.duty_pct, Vec::new()))
            .1
            .extend(set.amplitudes());
    }
    let mut analyses = Vec::with_capacity(groups.len());
    for ((subject, _), (frequency_hz, by_duty)) in groups {
        let data = GroupedAmplitudes::new(by_duty.into_values().collect())?;
        let kw = kruskal_wallis(&data)?;
        let best = best_duty(frequency_hz, &kw).expect("at least two groups");
        analyses.push(Analysis {
            subject,
            frequency_hz,
            kw,
            best,
        });
    }
    Ok(StatsReport { scope, analyses })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCell {
    pub frequency_hz: f64,
    pub duty_pct: f64,
    #[serde(flatten)]
    pub stats: BoxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityVote {
    pub frequency_hz: f64,
    pub duty_pct: f64,
    pub votes: usize,
    pub subjects: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
    pub subjects: Vec<u32>,
    pub n_amplitudes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub provenance: Provenance,
    /// Pooled over subjects, ascending by (frequency, duty).
    pub box_plots: Vec<BoxCell>,
    pub pooled: Vec<Analysis>,
    pub per_subject: Vec<Analysis>,
    /// Best duty per frequency from the pooled tests.
    pub selected: BestDutySelection,
    /// Most frequent per-subject best duty per frequency; ties go to the lower duty.
    pub majority: Vec<MajorityVote>,
    pub comfort: Option<ComfortSummary>,
}

impl ReportBundle {
    /// Writes `frequency_hz,duty_pct,n,q25,median,q75`.
    pub fn write_box_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        #[derive(Serialize)]
        struct Row {
            frequency_hz: f64,
            duty_pct: f64,
            n: usize,
            q25: f64,
            median: f64,
            q75: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for c in &self.box_plots {
            w.serialize(Row {
                frequency_hz: c.frequency_hz,
                duty_pct: c.duty_pct,
                n: c.stats.n,
                q25: c.stats.q25,
                median: c.stats.median,
                q75: c.stats.q75,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

/// Votes per duty, keyed by milli-duty.
type DutyVotes = BTreeMap<i64, (f64, usize)>;

fn majority_votes(per_subject: &[Analysis]) -> Vec<MajorityVote> {
    let mut by_freq: BTreeMap<i64, (f64, DutyVotes, usize)> = BTreeMap::new();
    for a in per_subject {
        let e = by_freq.entry(milli_key(a.frequency_hz)).or_insert((
            a.frequency_hz,
            BTreeMap::new(),
            0,
        ));
        e.1.entry(milli_key(a.best.duty_pct))
            .or_insert((a.best.duty_pct, 0))
            .1 += 1;
        e.2 += 1;
    }
    by_freq
        .into_values()
        .map(|(frequency_hz, counts, subjects)| {
            // Ascending duty order; strict > keeps the lowest duty on ties.
            let (duty_pct, votes) =
                counts.into_values().fold(
                    (f64::NAN, 0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            MajorityVote {
                frequency_hz,
                duty_pct,
                votes,
                subjects,
            }
        })
        .collect()
}

pub fn build_report(
    sets: &[AmplitudeSet],
    comfort: Option<&ComfortRatings>,
    mut provenance: Provenance,
) -> Result<ReportBundle, ProtocolError> {
    let mut pooled_values: BTreeMap<Condition, Vec<f64>> = BTreeMap::new();
    let mut sorted: Vec<&AmplitudeSet> = sets.iter().collect();
    sorted.sort_by_key(|s| (s.subject, s.condition));
    for s in &sorted {
        pooled_values
            .entry(s.condition)
            .or_default()
            .extend(s.amplitudes());
    }
    let box_plots = pooled_values
        .iter()
        .map(|(c, v)| {
            Ok(BoxCell {
                frequency_hz: c.frequency_hz,
                duty_pct: c.duty_pct,
                stats: box_stats(v)?,
            })
        })
        .collect::<Result<Vec<_>, ProtocolError>>()?;

    let pooled = analyze_sets(sets, Scope::Pooled)?.analyses;
    let per_subject = analyze_sets(sets, Scope::Subject)?.analyses;
    let selected = BestDutySelection {
        per_frequency: pooled.iter().map(|a| a.best.clone()).collect(),
    };
    let majority = majority_votes(&per_subject);

    let mut subjects: Vec<u32> = sets.iter().map(|s| s.subject).collect();
    subjects.sort_unstable();
    subjects.dedup();
    provenance.subjects = subjects;
    provenance.n_amplitudes = sets.iter().map(|s| s.len()).sum();

    Ok(ReportBundle {
        provenance,
        box_plots,
        pooled,
        per_subject,
        selected,
        majority,
        comfort: comfort.map(aggregate_comfort),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::EpochAmplitude;

    #[test]
    fn box_examples() {
        let b = box_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((b.median, b.q25, b.q75, b.n), (2.5, 1.75, 3.25, 4));
        let b = box_stats(&[7.0]).unwrap();
        assert_eq!((b.median, b.q25, b.q75), (7.0, 7.0, 7.0));
        let sym = [-3.0, -1.0, 0.5, 2.0, 3.5, 4.0];
        let mean = sym.iter().sum::<f64>() / 6.0;
        let mirrored: Vec<f64> = sym.iter().map(|v| 2.0 * mean - v).chain(sym).collect();
        let m = mirrored.iter().sum::<f64>() / mirrored.len() as f64;
        assert!((box_stats(&mirrored).unwrap().median - m).abs() < 1e-12);
        assert!(matches!(box_stats(&[]), Err(ProtocolError::EmptyBox)));
    }

    fn set(subject: u32, f: f64, d: f64, values: &[f64]) -> AmplitudeSet {
        AmplitudeSet {
            subject,
            condition: Condition::new(f, d),
            epochs: values
                .iter()
                .enumerate()
                .map(|(i, &a)| EpochAmplitude {
                    trial: 1,
                    segment: i as u32 + 1,
                    peak_hz: None,
                    amplitude: a,
                })
                .collect(),
        }
    }

    fn toy() -> Vec<AmplitudeSet> {
        vec![
            set(1, 7.0, 50.0, &[1.0, 2.0, 3.0]),
            set(1, 7.0, 85.0, &[4.0, 5.0, 6.0]),
            set(2, 7.0, 85.0, &[9.0, 8.0, 7.0]),
            set(2, 7.0, 50.0, &[1.5, 2.5, 3.5]),
        ]
    }

    #[test]
    fn subject_and_pooled_scopes() {
        let sub = analyze_sets(&toy(), Scope::Subject).unwrap();
        assert_eq!(sub.analyses.len(), 2);
        assert_eq!(sub.analyses[0].subject, Some(1));
        assert!((sub.analyses[0].kw.h_statistic - 3.857_142_857_142_857).abs() < 1e-12);
        assert_eq!(sub.analyses[0].best.duty_pct, 85.0);

        let pooled = analyze_sets(&toy(), Scope::Pooled).unwrap();
        assert_eq!(pooled.analyses.len(), 1);
        assert_eq!(pooled.analyses[0].subject, None);
        assert_eq!(pooled.analyses[0].kw.n_total, 12);
        assert_eq!(pooled.analyses[0].kw.groups[0].n, 6);
        assert!(pooled.analyses[0].kw.rank_sum_residual() < 1e-12);
    }

    #[test]
    fn single_duty_cannot_be_tested() {
        let sets = vec![set(1, 7.0, 50.0, &[1.0, 2.0, 3.0])];
        assert!(matches!(
            analyze_sets(&sets, Scope::Pooled),
            Err(ProtocolError::Stats(_))
        ));
    }

    #[test]
    fn bundle_contents() {
        let r = build_report(&toy(), None, Provenance::default()).unwrap();
        assert_eq!(r.box_plots.len(), 2);
        assert_eq!(r.box_plots[0].stats.n, 6);
        assert!(r
            .box_plots
            .iter()
            .all(|c| c.stats.q25 <= c.stats.median && c.stats.median <= c.stats.q75));
        assert_eq!(r.selected.duty_for(7.0), Some(85.0));
        assert_eq!(r.majority[0].duty_pct, 85.0);
        assert_eq!(r.majority[0].votes, 2);
        assert_eq!(r.provenance.subjects, vec![1, 2]);
        assert_eq!(r.provenance.n_amplitudes, 12);
        let mut csv = Vec::new();
        r.write_box_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv)
            .unwrap()
            .starts_with("frequency_hz,duty_pct,n,q25,median,q75\n7.0,50.0,6,"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["selected"]["per_frequency"][0]["duty_pct"], 85.0);
    }

    #[test]
    fn majority_tie_goes_to_lower_duty() {
        let mut sets = toy();
        sets.push(set(3, 7.0, 50.0, &[10.0, 11.0, 12.0]));
        sets.push(set(3, 7.0, 85.0, &[1.0, 1.0, 1.0]));
        sets.push(set(4, 7.0, 50.0, &[10.0, 11.0, 12.0]));
        sets.push(set(4, 7.0, 85.0, &[1.0, 1.0, 1.0]));
        let r = build_report(&sets, None, Provenance::default()).unwrap();
        assert_eq!(r.majority[0].votes, 2);
        assert_eq!(r.majority[0].duty_pct, 50.0);
    }
}
