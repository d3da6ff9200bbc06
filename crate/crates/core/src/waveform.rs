//! Tick-quantized PWM flicker schedules.
//!
//! A stimulus is described by its frequency and duty cycle; a hardware timer
//! realizes it as a sequence of ON/OFF edges on an integer tick grid. This
//! module builds that grid with a fixed reload per cycle (every cycle is
//! identical) and measures a schedule back, which is how the accuracy of a
//! stimulus is verified.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

/// Default timer resolution: 1 µs.
pub const DEFAULT_TICK_RATE_HZ: u64 = 1_000_000;
/// Minimum ratio between tick rate and stimulus frequency.
pub const MIN_TICKS_PER_HZ: f64 = 1e4;
/// Frequency accuracy required of a stimulus.
pub const FREQ_TOLERANCE_HZ: f64 = 0.1;
/// Duty-cycle accuracy required of a stimulus, percentage points.
pub const DUTY_TOLERANCE_PP: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveformError {
    #[error("frequency must be positive and finite, got {0} Hz")]
    BadFrequency(f64),
    #[error("duty cycle must lie strictly between 0 and 100 %, got {0}")]
    BadDuty(f64),
    #[error("duration must be positive and finite, got {0} s")]
    BadDuration(f64),
    #[error("tick rate {tick_rate} Hz is below {min} Hz required for {frequency_hz} Hz")]
    TickRateTooLow {
        tick_rate: u64,
        frequency_hz: f64,
        min: f64,
    },
    #[error("duty {duty_pct}% collapses to {on_ticks} of {cycle_ticks} ticks")]
    DegenerateDuty {
        duty_pct: f64,
        on_ticks: u64,
        cycle_ticks: u64,
    },
    #[error("malformed schedule: {0}")]
    Malformed(String),
    #[error("schedule has {0} full cycles, need at least 2")]
    TooFewCycles(usize),
}

/// Nominal flicker parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StimulusSpec {
    frequency_hz: f64,
    duty_pct: f64,
    tick_rate_hz: u64,
    duration_s: f64,
}

impl StimulusSpec {
    /// A spec at the default tick rate lasting one second.
    pub fn new(frequency_hz: f64, duty_pct: f64) -> Result<Self, WaveformError> {
        Self::with_timing(frequency_hz, duty_pct, DEFAULT_TICK_RATE_HZ, 1.0)
    }

    pub fn with_timing(
        frequency_hz: f64,
        duty_pct: f64,
        tick_rate_hz: u64,
        duration_s: f64,
    ) -> Result<Self, WaveformError> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(WaveformError::BadFrequency(frequency_hz));
        }
        if !(duty_pct > 0.0 && duty_pct < 100.0) {
            return Err(WaveformError::BadDuty(duty_pct));
        }
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(WaveformError::BadDuration(duration_s));
        }
        let min = MIN_TICKS_PER_HZ * frequency_hz;
        if (tick_rate_hz as f64) < min {
            return Err(WaveformError::TickRateTooLow {
                tick_rate: tick_rate_hz,
                frequency_hz,
                min,
            });
        }
        Ok(Self {
            frequency_hz,
            duty_pct,
            tick_rate_hz,
            duration_s,
        })
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn duty_pct(&self) -> f64 {
        self.duty_pct
    }

    pub fn tick_rate_hz(&self) -> u64 {
        self.tick_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn period_s(&self) -> f64 {
        1.0 / self.frequency_hz
    }
}

/// ON and OFF durations of one flicker cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnOffPeriods {
    pub t_on_s: f64,
    pub t_off_s: f64,
}

impl OnOffPeriods {
    /// Duty cycle in percent: `T_ON / (T_ON + T_OFF) × 100`.
    pub fn duty_pct(&self) -> f64 {
        self.t_on_s / (self.t_on_s + self.t_off_s) * 100.0
    }

    pub fn period_s(&self) -> f64 {
        self.t_on_s + self.t_off_s
    }
}

pub fn compute_on_off(spec: &StimulusSpec) -> OnOffPeriods {
    let period = spec.period_s();
    let t_on = spec.duty_pct / 100.0 * period;
    OnOffPeriods {
        t_on_s: t_on,
        t_off_s: period - t_on,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Level {
    On,
    Off,
}

impl Level {
    fn as_digit(self) -> u8 {
        match self {
            Level::On => 1,
            Level::Off => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub tick: u64,
    pub level: Level,
}

/// ON/OFF transitions on the timer grid. The output is held at the level of
/// the last edge until `end_tick`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeSchedule {
    edges: Vec<Edge>,
    tick_rate_hz: u64,
    end_tick: u64,
}

impl EdgeSchedule {
    /// Wraps raw edges without validation; [`measure_schedule`] checks them.
    pub fn from_edges(edges: Vec<Edge>, tick_rate_hz: u64, end_tick: u64) -> Self {
        Self {
            edges,
            tick_rate_hz,
            end_tick,
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tick_rate_hz(&self) -> u64 {
        self.tick_rate_hz
    }

    pub fn end_tick(&self) -> u64 {
        self.end_tick
    }

    pub fn duration_s(&self) -> f64 {
        self.end_tick as f64 / self.tick_rate_hz as f64
    }

    /// Writes `tick,level` lines (level 1 = ON, 0 = OFF) with a header row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "tick,level")?;
        for e in &self.edges {
            writeln!(out, "{},{}", e.tick, e.level.as_digit())?;
        }
        Ok(())
    }
}

/// Per-cycle tick counts after nearest-tick rounding.
pub fn quantize(spec: &StimulusSpec) -> Result<(u64, u64), WaveformError> {
    let rate = spec.tick_rate_hz as f64;
    let cycle_ticks = (rate / spec.frequency_hz).round() as u64;
    let on_ticks = (spec.duty_pct / 100.0 * rate / spec.frequency_hz).round() as u64;
    if on_ticks == 0 || on_ticks >= cycle_ticks {
        return Err(WaveformError::DegenerateDuty {
            duty_pct: spec.duty_pct,
            on_ticks,
            cycle_ticks,
        });
    }
    Ok((cycle_ticks, on_ticks))
}

pub fn build_edge_schedule(spec: &StimulusSpec) -> Result<EdgeSchedule, WaveformError> {
    let (cycle, on) = quantize(spec)?;
    let needed = spec.duration_s * spec.tick_rate_hz as f64;
    let cycles = ((needed / cycle as f64).ceil() as u64).max(1);
    let mut edges = Vec::with_capacity(2 * cycles as usize);
    for c in 0..cycles {
        let start = c * cycle;
        edges.push(Edge {
            tick: start,
            level: Level::On,
        });
        edges.push(Edge {
            tick: start + on,
            level: Level::Off,
        });
    }
    Ok(EdgeSchedule {
        edges,
        tick_rate_hz: spec.tick_rate_hz,
        end_tick: cycles * cycle,
    })
}

/// Result of measuring a schedule against its nominal stimulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredWaveform {
    pub measured_freq_hz: f64,
    pub measured_duty_pct: f64,
    pub freq_error_hz: f64,
    pub duty_error_pp: f64,
    pub cycles: usize,
}

impl MeasuredWaveform {
    pub fn within_tolerance(&self) -> bool {
        self.freq_error_hz <= FREQ_TOLERANCE_HZ && self.duty_error_pp <= DUTY_TOLERANCE_PP
    }
}

pub fn measure_schedule(
    schedule: &EdgeSchedule,
    nominal: &StimulusSpec,
) -> Result<MeasuredWaveform, WaveformError> {
    let edges = &schedule.edges;
    match edges.first() {
        None => return Err(WaveformError::Malformed("no edges".into())),
        Some(e) if e.tick != 0 || e.level != Level::On => {
            return Err(WaveformError::Malformed(
                "first edge must be ON at tick 0".into(),
            ))
        }
        _ => {}
    }
    if schedule.tick_rate_hz == 0 {
        return Err(WaveformError::Malformed("zero tick rate".into()));
    }
    for (i, pair) in edges.windows(2).enumerate() {
        if pair[1].tick <= pair[0].tick {
            return Err(WaveformError::Malformed(format!(
                "edge {} at tick {} does not follow tick {}",
                i + 1,
                pair[1].tick,
                pair[0].tick
            )));
        }
        if pair[1].level == pair[0].level {
            return Err(WaveformError::Malformed(format!(
                "edges {} and {} share a level",
                i,
                i + 1
            )));
        }
    }
    let last = edges[edges.len() - 1];
    if schedule.end_tick <= last.tick {
        return Err(WaveformError::Malformed(
            "end tick must follow the last edge".into(),
        ));
    }
    // A full cycle is an ON edge, its OFF edge and the next ON edge (or the end).
    if last.level == Level::On {
        return Err(WaveformError::Malformed("schedule ends mid-cycle".into()));
    }

    let cycles = edges.len() / 2;
    if cycles < 2 {
        return Err(WaveformError::TooFewCycles(cycles));
    }
    let mut total_cycle = 0u64;
    let mut duty_sum = 0.0;
    for c in 0..cycles {
        let start = edges[2 * c].tick;
        let off = edges[2 * c + 1].tick;
        let next = edges.get(2 * c + 2).map_or(schedule.end_tick, |e| e.tick);
        let len = next - start;
        total_cycle += len;
        duty_sum += (off - start) as f64 / len as f64;
    }
    let mean_cycle = total_cycle as f64 / cycles as f64;
    let measured_freq_hz = schedule.tick_rate_hz as f64 / mean_cycle;
    let measured_duty_pct = duty_sum / cycles as f64 * 100.0;
    Ok(MeasuredWaveform {
        measured_freq_hz,
        measured_duty_pct,
        freq_error_hz: (measured_freq_hz - nominal.frequency_hz).abs(),
        duty_error_pp: (measured_duty_pct - nominal.duty_pct).abs(),
        cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{DEFAULT_DUTIES_PCT, DEFAULT_FREQUENCIES_HZ};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn on_off_examples() {
        let p = compute_on_off(&StimulusSpec::new(7.0, 85.0).unwrap());
        assert!(close(p.t_on_s, 0.85 / 7.0, 1e-15));
        assert!(close(p.t_on_s, 0.1214286, 5e-8));
        assert!(close(p.t_off_s, 0.0214286, 5e-8));

        let p = compute_on_off(&StimulusSpec::new(10.0, 50.0).unwrap());
        assert_eq!(p.t_on_s, 0.05);
        assert_eq!(p.t_off_s, 0.05);

        let p = compute_on_off(&StimulusSpec::new(8.0, 95.0).unwrap());
        assert!(close(p.t_on_s, 0.11875, 1e-15));
        assert!(close(p.t_off_s, 0.00625, 1e-15));
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(matches!(
            StimulusSpec::new(7.0, 0.0),
            Err(WaveformError::BadDuty(_))
        ));
        assert!(matches!(
            StimulusSpec::new(7.0, 100.0),
            Err(WaveformError::BadDuty(_))
        ));
        assert!(matches!(
            StimulusSpec::new(0.0, 50.0),
            Err(WaveformError::BadFrequency(_))
        ));
        assert!(matches!(
            StimulusSpec::new(-3.0, 50.0),
            Err(WaveformError::BadFrequency(_))
        ));
        assert!(matches!(
            StimulusSpec::with_timing(7.0, 50.0, 1_000_000, 0.0),
            Err(WaveformError::BadDuration(_))
        ));
        assert!(matches!(
            StimulusSpec::with_timing(200.0, 50.0, 1_000_000, 1.0),
            Err(WaveformError::TickRateTooLow { .. })
        ));
    }

    #[test]
    fn quantization_examples() {
        let q = |f, d| quantize(&StimulusSpec::new(f, d).unwrap()).unwrap();
        assert_eq!(q(7.0, 85.0), (142_857, 121_429));
        assert_eq!(q(10.0, 50.0), (100_000, 50_000));
        assert_eq!(q(9.0, 95.0), (111_111, 105_556));
    }

    #[test]
    fn degenerate_duty_is_an_error() {
        // 1 Hz at 10⁴ ticks/s: 0.001 % is 0.1 tick.
        let spec = StimulusSpec::with_timing(1.0, 0.001, 10_000, 2.0).unwrap();
        assert!(matches!(
            build_edge_schedule(&spec),
            Err(WaveformError::DegenerateDuty { on_ticks: 0, .. })
        ));
        let spec = StimulusSpec::with_timing(1.0, 99.999, 10_000, 2.0).unwrap();
        assert!(matches!(
            build_edge_schedule(&spec),
            Err(WaveformError::DegenerateDuty { .. })
        ));
    }

    #[test]
    fn schedule_covers_duration() {
        let spec = StimulusSpec::with_timing(7.0, 85.0, DEFAULT_TICK_RATE_HZ, 30.0).unwrap();
        let s = build_edge_schedule(&spec).unwrap();
        assert!(s.duration_s() >= 30.0);
        assert_eq!(s.edges().len(), 2 * 211);
        assert_eq!(s.edges()[1].tick, 121_429);
        assert_eq!(s.edges()[2].tick, 142_857);
    }

    #[test]
    fn measures_7hz_85pct() {
        let spec = StimulusSpec::with_timing(7.0, 85.0, DEFAULT_TICK_RATE_HZ, 2.0).unwrap();
        let m = measure_schedule(&build_edge_schedule(&spec).unwrap(), &spec).unwrap();
        assert!(m.freq_error_hz < 1e-4, "{m:?}");
        assert!(m.duty_error_pp < 1e-3, "{m:?}");
    }

    #[test]
    fn measures_10hz_50pct_exactly() {
        let spec = StimulusSpec::with_timing(10.0, 50.0, DEFAULT_TICK_RATE_HZ, 2.0).unwrap();
        let m = measure_schedule(&build_edge_schedule(&spec).unwrap(), &spec).unwrap();
        assert_eq!(m.freq_error_hz, 0.0);
        assert_eq!(m.duty_error_pp, 0.0);
    }

    #[test]
    fn default_grid_within_tolerance() {
        for f in DEFAULT_FREQUENCIES_HZ {
            for d in DEFAULT_DUTIES_PCT {
                let spec = StimulusSpec::with_timing(f, d, DEFAULT_TICK_RATE_HZ, 1.0).unwrap();
                let m = measure_schedule(&build_edge_schedule(&spec).unwrap(), &spec).unwrap();
                assert!(m.within_tolerance(), "{f} Hz {d}%: {m:?}");
            }
        }
    }

    #[test]
    fn malformed_schedules_rejected() {
        let spec = StimulusSpec::new(10.0, 50.0).unwrap();
        let on = |t| Edge {
            tick: t,
            level: Level::On,
        };
        let off = |t| Edge {
            tick: t,
            level: Level::Off,
        };
        let cases = [
            EdgeSchedule::from_edges(vec![], 1_000_000, 10),
            EdgeSchedule::from_edges(vec![off(0), on(5)], 1_000_000, 10),
            EdgeSchedule::from_edges(vec![on(0), on(5), off(7)], 1_000_000, 10),
            EdgeSchedule::from_edges(vec![on(0), off(5), on(5), off(8)], 1_000_000, 10),
            EdgeSchedule::from_edges(vec![on(0), off(5), on(8), off(9)], 1_000_000, 9),
        ];
        for s in cases {
            assert!(
                matches!(
                    measure_schedule(&s, &spec),
                    Err(WaveformError::Malformed(_))
                ),
                "{s:?}"
            );
        }
        let one = EdgeSchedule::from_edges(vec![on(0), off(5)], 1_000_000, 10);
        assert_eq!(
            measure_schedule(&one, &spec),
            Err(WaveformError::TooFewCycles(1))
        );
    }

    #[test]
    fn csv_output() {
        let spec = StimulusSpec::with_timing(10.0, 50.0, 1_000_000, 0.2).unwrap();
        let mut buf = Vec::new();
        build_edge_schedule(&spec)
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "tick,level\n0,1\n50000,0\n100000,1\n150000,0\n"
        );
    }

    proptest! {
        #[test]
        fn round_trip_error_bounds(f in 0.5f64..60.0, d in 1.0f64..99.0, rate_exp in 6u32..9) {
            let rate = 10u64.pow(rate_exp);
            let spec = StimulusSpec::with_timing(f, d, rate, 2.0 / f).unwrap();
            let sched = build_edge_schedule(&spec).unwrap();
            let m = measure_schedule(&sched, &spec).unwrap();
            let period_ticks = rate as f64 / f;
            prop_assert!(m.freq_error_hz <= f * f / rate as f64 * (1.0 + 1e-9));
            prop_assert!(m.duty_error_pp <= 100.0 / period_ticks);
        }

        #[test]
        fn on_off_identity(f in 0.1f64..200.0, d in 0.01f64..99.99) {
            let spec = StimulusSpec::with_timing(f, d, 100_000_000, 1.0).unwrap();
            let p = compute_on_off(&spec);
            prop_assert!(p.t_on_s > 0.0 && p.t_off_s > 0.0);
            prop_assert!(((p.duty_pct() - d) / d).abs() <= 1e-12);
            prop_assert!(((p.period_s() - 1.0 / f) * f).abs() <= 1e-12);
        }

        #[test]
        fn on_ticks_monotone_in_duty(f in 1.0f64..50.0, d in 1.0f64..90.0, step in 0.1f64..9.0) {
            let a = StimulusSpec::new(f, d).unwrap();
            let b = StimulusSpec::new(f, d + step).unwrap();
            let (_, on_a) = quantize(&a).unwrap();
            let (_, on_b) = quantize(&b).unwrap();
            prop_assert!(on_b > on_a);
        }
    }
}
