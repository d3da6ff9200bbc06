//! Reader and writer for EDF recordings.
//!
//! Layout: a 256-byte main header, 256 bytes of signal headers per signal
//! (stored field-by-field across all signals), then data records. Each record
//! holds `samples_per_record` 16-bit little-endian two's-complement samples
//! for every signal in turn. All header fields are space-padded printable
//! ASCII.
//!
//! Parsed text fields have trailing spaces removed; the writer pads them back.
//! Numeric fields are written in their shortest exact decimal form, so a file
//! produced by [`write_edf`] is reproduced byte for byte by
//! `write_edf(&parse_edf(bytes)?)`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::series::SampleSeries;

const MAIN_HEADER_BYTES: usize = 256;
const SIGNAL_HEADER_BYTES: usize = 256;

#[derive(Debug, Error)]
pub enum EdfError {
    #[error("file truncated: need {needed} bytes, have {actual}")]
    Truncated { needed: usize, actual: usize },
    #[error("header byte count {declared} does not match 256 × (1 + {n_signals})")]
    HeaderBytesMismatch { declared: i64, n_signals: usize },
    #[error("field `{field}` is not a valid number: {text:?}")]
    BadNumber { field: &'static str, text: String },
    #[error("field `{field}` contains non-printable or non-ASCII bytes")]
    BadText { field: &'static str },
    #[error("payload is {actual} bytes, expected {expected}")]
    PayloadLength { expected: usize, actual: usize },
    #[error("payload of {payload} bytes ends in a partial record of {record} bytes")]
    PartialRecord { payload: usize, record: usize },
    #[error("value for `{field}` does not fit in {width} characters: {text:?}")]
    FieldOverflow {
        field: &'static str,
        width: usize,
        text: String,
    },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("signal {index}: {reason}")]
    InvalidSignal { index: usize, reason: String },
    #[error("no signal labelled {0:?}")]
    UnknownLabel(String),
    #[error("label {0:?} matches more than one signal")]
    AmbiguousLabel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Main (file-level) header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdfFileHeader {
    pub version: String,
    pub patient_id: String,
    pub recording_id: String,
    /// `dd.mm.yy`
    pub start_date: String,
    /// `hh.mm.ss`
    pub start_time: String,
    pub header_bytes: usize,
    pub reserved: String,
    pub n_records: usize,
    pub record_duration_s: f64,
    pub n_signals: usize,
}

impl EdfFileHeader {
    /// Header with blank identification fields and the given record layout.
    pub fn new(n_records: usize, record_duration_s: f64, n_signals: usize) -> Self {
        Self {
            version: "0".into(),
            patient_id: String::new(),
            recording_id: String::new(),
            start_date: "01.01.00".into(),
            start_time: "00.00.00".into(),
            header_bytes: header_bytes_for(n_signals),
            reserved: String::new(),
            n_records,
            record_duration_s,
            n_signals,
        }
    }
}

/// Per-signal header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalHeader {
    pub label: String,
    pub transducer: String,
    pub physical_dimension: String,
    pub physical_min: f64,
    pub physical_max: f64,
    pub digital_min: i32,
    pub digital_max: i32,
    pub prefiltering: String,
    pub samples_per_record: usize,
    pub reserved: String,
}

impl SignalHeader {
    /// Full 16-bit digital range mapped onto `[physical_min, physical_max]`.
    pub fn new(
        label: impl Into<String>,
        physical_min: f64,
        physical_max: f64,
        samples_per_record: usize,
    ) -> Self {
        Self {
            label: label.into(),
            transducer: String::new(),
            physical_dimension: String::new(),
            physical_min,
            physical_max,
            digital_min: i16::MIN as i32,
            digital_max: i16::MAX as i32,
            prefiltering: String::new(),
            samples_per_record,
            reserved: String::new(),
        }
    }

    /// Physical value of one digital sample.
    pub fn to_physical(&self, digital: i16) -> f64 {
        let dig_span = (self.digital_max - self.digital_min) as f64;
        let phys_span = self.physical_max - self.physical_min;
        (digital as i32 - self.digital_min) as f64 * phys_span / dig_span + self.physical_min
    }

    /// Nearest digital sample for a physical value, clamped to the digital range.
    pub fn to_digital(&self, physical: f64) -> i16 {
        let dig_span = (self.digital_max - self.digital_min) as f64;
        let phys_span = self.physical_max - self.physical_min;
        let d = (physical - self.physical_min) * dig_span / phys_span + self.digital_min as f64;
        d.round()
            .clamp(self.digital_min as f64, self.digital_max as f64) as i16
    }

    fn validate(&self, index: usize) -> Result<(), EdfError> {
        let bad = |reason: String| Err(EdfError::InvalidSignal { index, reason });
        if self.digital_min >= self.digital_max {
            return bad(format!(
                "digital_min {} not below digital_max {}",
                self.digital_min, self.digital_max
            ));
        }
        if self.digital_min < i16::MIN as i32 || self.digital_max > i16::MAX as i32 {
            return bad("digital range exceeds 16 bits".into());
        }
        if !(self.physical_min.is_finite() && self.physical_max.is_finite())
            || self.physical_min == self.physical_max
        {
            return bad("physical range is empty or non-finite".into());
        }
        if self.samples_per_record == 0 {
            return bad("samples_per_record must be at least 1".into());
        }
        Ok(())
    }
}

/// A complete recording: headers plus de-interleaved digital samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdfRecording {
    header: EdfFileHeader,
    signals: Vec<SignalHeader>,
    samples: Vec<Vec<i16>>,
}

fn header_bytes_for(n_signals: usize) -> usize {
    MAIN_HEADER_BYTES + SIGNAL_HEADER_BYTES * n_signals
}

impl EdfRecording {
    /// Validates headers against the sample matrix. `header.n_signals` and
    /// `header.header_bytes` must agree with `signals`; `header.n_records`
    /// with the sample counts.
    pub fn new(
        header: EdfFileHeader,
        signals: Vec<SignalHeader>,
        samples: Vec<Vec<i16>>,
    ) -> Result<Self, EdfError> {
        if signals.is_empty() {
            return Err(EdfError::InvalidHeader(
                "at least one signal required".into(),
            ));
        }
        if header.n_signals != signals.len() {
            return Err(EdfError::InvalidHeader(format!(
                "n_signals {} but {} signal headers",
                header.n_signals,
                signals.len()
            )));
        }
        if header.header_bytes != header_bytes_for(signals.len()) {
            return Err(EdfError::HeaderBytesMismatch {
                declared: header.header_bytes as i64,
                n_signals: signals.len(),
            });
        }
        if !(header.record_duration_s.is_finite() && header.record_duration_s > 0.0) {
            return Err(EdfError::InvalidHeader(format!(
                "record duration must be positive, got {}",
                header.record_duration_s
            )));
        }
        if samples.len() != signals.len() {
            return Err(EdfError::InvalidHeader(format!(
                "{} sample vectors for {} signals",
                samples.len(),
                signals.len()
            )));
        }
        for (i, (sig, data)) in signals.iter().zip(&samples).enumerate() {
            sig.validate(i)?;
            let expected = header.n_records * sig.samples_per_record;
            if data.len() != expected {
                return Err(EdfError::InvalidSignal {
                    index: i,
                    reason: format!("{} samples, expected {}", data.len(), expected),
                });
            }
        }
        Ok(Self {
            header,
            signals,
            samples,
        })
    }

    /// Single-signal recording cut into records of `samples_per_record`.
    /// Trailing samples that do not fill a record are an error.
    pub fn single_channel(
        mut header: EdfFileHeader,
        signal: SignalHeader,
        samples: Vec<i16>,
    ) -> Result<Self, EdfError> {
        let spr = signal.samples_per_record.max(1);
        if !samples.len().is_multiple_of(spr) {
            return Err(EdfError::InvalidSignal {
                index: 0,
                reason: format!(
                    "{} samples is not a whole number of records of {spr}",
                    samples.len()
                ),
            });
        }
        header.n_records = samples.len() / spr;
        header.n_signals = 1;
        header.header_bytes = header_bytes_for(1);
        Self::new(header, vec![signal], vec![samples])
    }

    pub fn header(&self) -> &EdfFileHeader {
        &self.header
    }

    pub fn signals(&self) -> &[SignalHeader] {
        &self.signals
    }

    /// Digital samples of signal `index`.
    pub fn samples(&self, index: usize) -> &[i16] {
        &self.samples[index]
    }

    fn record_samples(&self) -> usize {
        self.signals.iter().map(|s| s.samples_per_record).sum()
    }

    /// Size of the file [`write_edf`] produces.
    pub fn byte_len(&self) -> usize {
        self.header.header_bytes + self.header.n_records * self.record_samples() * 2
    }

    /// Index of the signal whose trimmed label equals `label`.
    pub fn find_signal(&self, label: &str) -> Result<usize, EdfError> {
        let query = label.trim();
        let mut hits = self
            .signals
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label.trim() == query)
            .map(|(i, _)| i);
        match (hits.next(), hits.next()) {
            (Some(i), None) => Ok(i),
            (None, _) => Err(EdfError::UnknownLabel(label.to_string())),
            (Some(_), Some(_)) => Err(EdfError::AmbiguousLabel(label.to_string())),
        }
    }
}

/// Physical-valued series for the signal labelled `label`.
pub fn extract_channel(recording: &EdfRecording, label: &str) -> Result<SampleSeries, EdfError> {
    let idx = recording.find_signal(label)?;
    let sig = &recording.signals[idx];
    let rate = sig.samples_per_record as f64 / recording.header.record_duration_s;
    let values = recording.samples[idx]
        .iter()
        .map(|&d| sig.to_physical(d))
        .collect();
    SampleSeries::new(values, rate, sig.label.trim())
        .map_err(|e| EdfError::InvalidHeader(e.to_string()))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, width: usize) -> &'a [u8] {
        let out = &self.bytes[self.pos..self.pos + width];
        self.pos += width;
        out
    }

    fn text(&mut self, field: &'static str, width: usize) -> Result<String, EdfError> {
        let raw = self.take(width);
        if raw.iter().any(|b| !(0x20..=0x7e).contains(b)) {
            return Err(EdfError::BadText { field });
        }
        // Checked above: printable ASCII is valid UTF-8.
        let s = std::str::from_utf8(raw).expect("ascii");
        Ok(s.trim_end_matches(' ').to_string())
    }

    fn number<T: std::str::FromStr>(
        &mut self,
        field: &'static str,
        width: usize,
    ) -> Result<T, EdfError> {
        let text = self.text(field, width)?;
        text.trim()
            .parse()
            .map_err(|_| EdfError::BadNumber { field, text })
    }

    fn real(&mut self, field: &'static str, width: usize) -> Result<f64, EdfError> {
        let v: f64 = self.number(field, width)?;
        if !v.is_finite() {
            return Err(EdfError::BadNumber {
                field,
                text: v.to_string(),
            });
        }
        Ok(v)
    }
}

pub fn parse_edf(bytes: &[u8]) -> Result<EdfRecording, EdfError> {
    if bytes.len() < MAIN_HEADER_BYTES {
        return Err(EdfError::Truncated {
            needed: MAIN_HEADER_BYTES,
            actual: bytes.len(),
        });
    }
    let mut cur = Cursor { bytes, pos: 0 };
    let version = cur.text("version", 8)?;
    let patient_id = cur.text("patient_id", 80)?;
    let recording_id = cur.text("recording_id", 80)?;
    let start_date = cur.text("start_date", 8)?;
    let start_time = cur.text("start_time", 8)?;
    let header_bytes: i64 = cur.number("header_bytes", 8)?;
    let reserved = cur.text("reserved", 44)?;
    let n_records_raw: i64 = cur.number("n_records", 8)?;
    let record_duration_s = cur.real("record_duration", 8)?;
    let n_signals_raw: i64 = cur.number("n_signals", 4)?;

    if !(1..=9999).contains(&n_signals_raw) {
        return Err(EdfError::InvalidHeader(format!(
            "signal count {n_signals_raw} out of range"
        )));
    }
    let n_signals = n_signals_raw as usize;
    let expected_header = header_bytes_for(n_signals);
    if header_bytes != expected_header as i64 {
        return Err(EdfError::HeaderBytesMismatch {
            declared: header_bytes,
            n_signals,
        });
    }
    if bytes.len() < expected_header {
        return Err(EdfError::Truncated {
            needed: expected_header,
            actual: bytes.len(),
        });
    }
    if n_records_raw < -1 {
        return Err(EdfError::InvalidHeader(format!(
            "record count {n_records_raw} is negative"
        )));
    }

    let mut signals: Vec<SignalHeader> = (0..n_signals)
        .map(|_| SignalHeader::new("", 0.0, 0.0, 0))
        .collect();
    for s in signals.iter_mut() {
        s.label = cur.text("label", 16)?;
    }
    for s in signals.iter_mut() {
        s.transducer = cur.text("transducer", 80)?;
    }
    for s in signals.iter_mut() {
        s.physical_dimension = cur.text("physical_dimension", 8)?;
    }
    for s in signals.iter_mut() {
        s.physical_min = cur.real("physical_min", 8)?;
    }
    for s in signals.iter_mut() {
        s.physical_max = cur.real("physical_max", 8)?;
    }
    for s in signals.iter_mut() {
        s.digital_min = cur.number("digital_min", 8)?;
    }
    for s in signals.iter_mut() {
        s.digital_max = cur.number("digital_max", 8)?;
    }
    for s in signals.iter_mut() {
        s.prefiltering = cur.text("prefiltering", 80)?;
    }
    for s in signals.iter_mut() {
        s.samples_per_record = cur.number("samples_per_record", 8)?;
    }
    for s in signals.iter_mut() {
        s.reserved = cur.text("signal_reserved", 32)?;
    }
    for (i, s) in signals.iter().enumerate() {
        s.validate(i)?;
    }

    let record_samples = signals
        .iter()
        .try_fold(0usize, |acc, s| acc.checked_add(s.samples_per_record))
        .ok_or_else(|| EdfError::InvalidHeader("record size overflows".into()))?;
    let record_bytes = record_samples
        .checked_mul(2)
        .ok_or_else(|| EdfError::InvalidHeader("record size overflows".into()))?;
    let payload = &bytes[expected_header..];

    let n_records = if n_records_raw == -1 {
        if !payload.len().is_multiple_of(record_bytes) {
            return Err(EdfError::PartialRecord {
                payload: payload.len(),
                record: record_bytes,
            });
        }
        payload.len() / record_bytes
    } else {
        let n = n_records_raw as usize;
        let expected = n
            .checked_mul(record_bytes)
            .ok_or_else(|| EdfError::InvalidHeader("payload size overflows".into()))?;
        if payload.len() != expected {
            return Err(EdfError::PayloadLength {
                expected,
                actual: payload.len(),
            });
        }
        n
    };

    let mut samples: Vec<Vec<i16>> = signals
        .iter()
        .map(|s| Vec::with_capacity(n_records * s.samples_per_record))
        .collect();
    let mut words = payload
        .chunks_exact(2)
        .map(|w| i16::from_le_bytes([w[0], w[1]]));
    for _ in 0..n_records {
        for (s, out) in signals.iter().zip(samples.iter_mut()) {
            out.extend(words.by_ref().take(s.samples_per_record));
        }
    }

    let header = EdfFileHeader {
        version,
        patient_id,
        recording_id,
        start_date,
        start_time,
        header_bytes: expected_header,
        reserved,
        n_records,
        record_duration_s,
        n_signals,
    };
    EdfRecording::new(header, signals, samples)
}

fn put_text(
    out: &mut Vec<u8>,
    field: &'static str,
    value: &str,
    width: usize,
) -> Result<(), EdfError> {
    if value.bytes().any(|b| !(0x20..=0x7e).contains(&b)) {
        return Err(EdfError::BadText { field });
    }
    if value.len() > width {
        return Err(EdfError::FieldOverflow {
            field,
            width,
            text: value.to_string(),
        });
    }
    out.extend_from_slice(value.as_bytes());
    out.resize(out.len() + width - value.len(), b' ');
    Ok(())
}

fn put_real(
    out: &mut Vec<u8>,
    field: &'static str,
    value: f64,
    width: usize,
) -> Result<(), EdfError> {
    // Shortest representation that parses back to the same value.
    put_text(out, field, &format!("{value}"), width)
}

/// Serializes a recording. Fails when a field does not fit its width.
pub fn write_edf(recording: &EdfRecording) -> Result<Vec<u8>, EdfError> {
    let h = &recording.header;
    let mut out = Vec::with_capacity(recording.byte_len());
    put_text(&mut out, "version", &h.version, 8)?;
    put_text(&mut out, "patient_id", &h.patient_id, 80)?;
    put_text(&mut out, "recording_id", &h.recording_id, 80)?;
    put_text(&mut out, "start_date", &h.start_date, 8)?;
    put_text(&mut out, "start_time", &h.start_time, 8)?;
    put_text(&mut out, "header_bytes", &h.header_bytes.to_string(), 8)?;
    put_text(&mut out, "reserved", &h.reserved, 44)?;
    put_text(&mut out, "n_records", &h.n_records.to_string(), 8)?;
    put_real(&mut out, "record_duration", h.record_duration_s, 8)?;
    put_text(&mut out, "n_signals", &h.n_signals.to_string(), 4)?;

    let sigs = &recording.signals;
    for s in sigs {
        put_text(&mut out, "label", &s.label, 16)?;
    }
    for s in sigs {
        put_text(&mut out, "transducer", &s.transducer, 80)?;
    }
    for s in sigs {
        put_text(&mut out, "physical_dimension", &s.physical_dimension, 8)?;
    }
    for s in sigs {
        put_real(&mut out, "physical_min", s.physical_min, 8)?;
    }
    for s in sigs {
        put_real(&mut out, "physical_max", s.physical_max, 8)?;
    }
    for s in sigs {
        put_text(&mut out, "digital_min", &s.digital_min.to_string(), 8)?;
    }
    for s in sigs {
        put_text(&mut out, "digital_max", &s.digital_max.to_string(), 8)?;
    }
    for s in sigs {
        put_text(&mut out, "prefiltering", &s.prefiltering, 80)?;
    }
    for s in sigs {
        put_text(
            &mut out,
            "samples_per_record",
            &s.samples_per_record.to_string(),
            8,
        )?;
    }
    for s in sigs {
        put_text(&mut out, "signal_reserved", &s.reserved, 32)?;
    }
    debug_assert_eq!(out.len(), h.header_bytes);

    for r in 0..h.n_records {
        for (s, data) in sigs.iter().zip(&recording.samples) {
            let start = r * s.samples_per_record;
            for v in &data[start..start + s.samples_per_record] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn read_edf_file(path: impl AsRef<Path>) -> Result<EdfRecording, EdfError> {
    parse_edf(&fs::read(path)?)
}

pub fn write_edf_file(path: impl AsRef<Path>, recording: &EdfRecording) -> Result<(), EdfError> {
    fs::write(path, write_edf(recording)?)?;
    Ok(())
}
