//! Forecast streams in CSV.
//!
//! Header `step,p_<label1>,…,p_<labelK>,outcome`, one row per step, steps
//! numbered `1, 2, …` without gaps.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::distributions::{DiscreteDistribution, OutcomeSpace};
use crate::error::{Error, Result};
use crate::forecasters::StreamForecaster;
use crate::protocol::{run_session_with_tolerance, Sceptic, ScriptedReality, Transcript};

/// A validated stream of forecasts and outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastStream {
    pub space: OutcomeSpace,
    pub forecasts: Vec<DiscreteDistribution>,
    pub outcomes: Vec<usize>,
}

impl ForecastStream {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn from_transcript(t: &Transcript) -> Self {
        Self {
            space: t.space.clone(),
            forecasts: t.forecasts(),
            outcomes: t.outcomes(),
        }
    }

    /// Forecaster replaying the stream.
    pub fn forecaster(&self) -> StreamForecaster {
        StreamForecaster::new(self.forecasts.clone())
    }
}

fn malformed(row: usize, message: impl Into<String>) -> Error {
    Error::MalformedRow {
        row,
        message: message.into(),
    }
}

/// Reads a stream. With `declared`, the header labels must match its labels
/// in order; otherwise the space is taken from the header.
pub fn ingest_forecast_stream(path: &Path, declared: Option<&OutcomeSpace>) -> Result<ForecastStream> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_forecast_stream(&text, declared)
}

/// Data rows are numbered from 1; the header is row 0.
pub fn parse_forecast_stream(text: &str, declared: Option<&OutcomeSpace>) -> Result<ForecastStream> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| malformed(0, e.to_string()))?.clone();
    let n = header.len();
    if n < 3 || &header[0] != "step" || &header[n - 1] != "outcome" {
        return Err(malformed(0, "header must be step,p_<label>,…,outcome"));
    }
    let labels = header
        .iter()
        .skip(1)
        .take(n - 2)
        .map(|h| {
            h.strip_prefix("p_")
                .map(str::to_string)
                .ok_or_else(|| malformed(0, format!("column {h:?} lacks the p_ prefix")))
        })
        .collect::<Result<Vec<_>>>()?;
    let space = match declared {
        Some(s) => {
            if s.labels() != labels.as_slice() {
                return Err(malformed(0, format!("header labels {labels:?} differ from the declared space")));
            }
            s.clone()
        }
        None => OutcomeSpace::new(labels).map_err(|e| malformed(0, e.to_string()))?,
    };

    let mut forecasts = Vec::new();
    let mut outcomes = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| malformed(row, e.to_string()))?;
        if record.len() != n {
            return Err(malformed(row, format!("expected {n} fields, got {}", record.len())));
        }
        let step: usize = record[0]
            .parse()
            .map_err(|_| malformed(row, format!("bad step {:?}", &record[0])))?;
        if step != row {
            return Err(malformed(row, format!("step {step} out of sequence, expected {row}")));
        }
        let probs = (1..n - 1)
            .map(|j| {
                record[j]
                    .parse::<f64>()
                    .map_err(|_| malformed(row, format!("bad probability {:?}", &record[j])))
            })
            .collect::<Result<Vec<_>>>()?;
        let forecast = DiscreteDistribution::new(space.clone(), probs).map_err(|e| malformed(row, e.to_string()))?;
        let label = &record[n - 1];
        if label.is_empty() {
            return Err(malformed(row, "missing outcome"));
        }
        let outcome = space
            .index_of(label)
            .ok_or_else(|| malformed(row, format!("outcome {label:?} outside the declared space")))?;
        forecasts.push(forecast);
        outcomes.push(outcome);
    }
    Ok(ForecastStream {
        space,
        forecasts,
        outcomes,
    })
}

/// Writes a stream with shortest round-trip decimal probabilities.
pub fn write_forecast_stream(path: &Path, stream: &ForecastStream) -> Result<()> {
    let mut out = File::create(path)?;
    out.write_all(format_forecast_stream(stream).as_bytes())?;
    Ok(())
}

pub fn format_forecast_stream(stream: &ForecastStream) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string()];
    header.extend(stream.space.labels().iter().map(|l| format!("p_{l}")));
    header.push("outcome".into());
    w.write_record(&header).expect("in-memory write");
    for (i, (f, &y)) in stream.forecasts.iter().zip(&stream.outcomes).enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(f.probs().iter().map(|p| p.to_string()));
        row.push(stream.space.label(y).to_string());
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 labels")
}

/// Re-tests a stream: its forecasts against `sceptic`, Reality replaying its
/// outcomes.
pub fn replay_stream(stream: &ForecastStream, sceptic: &mut dyn Sceptic, seed: u64, tolerance: f64) -> Result<Transcript> {
    run_session_with_tolerance(
        &stream.space,
        &mut stream.forecaster(),
        sceptic,
        &mut ScriptedReality::new(stream.outcomes.clone()),
        stream.len(),
        seed,
        tolerance,
    )
}
