//! CSV ingestion and export for [`TimeSeriesFrame`].
//!
//! Expected layout: a header row, one timestamp column formatted
//! `YYYY-MM-DD HH:MM:SS` (a `T` separator is also accepted) and one column per
//! channel. Empty cells are missing observations. Gaps between consecutive
//! timestamps are filled with fully masked rows so the step stays one hour.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::frame::{Channel, TimeSeriesFrame, STEP};
use crate::error::{Error, Result};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

/// Maps CSV headers to channel names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    #[serde(default = "default_timestamp_column")]
    pub timestamp_column: String,
    /// Channel name (after mapping) of the forecast target.
    pub target: String,
    /// Columns to read; when empty every non-timestamp column is read under
    /// its header name.
    #[serde(default)]
    pub channels: Vec<ChannelMapping>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMapping {
    pub column: String,
    pub name: String,
}

fn default_timestamp_column() -> String {
    "timestamp".to_string()
}

impl CsvSchema {
    pub fn new(target: impl Into<String>) -> Self {
        Self {
            timestamp_column: default_timestamp_column(),
            target: target.into(),
            channels: Vec::new(),
        }
    }
}

pub fn parse_timestamp(raw: &str) -> Result<NaiveDateTime> {
    let raw = raw.trim();
    NaiveDateTime::parse_from_str(raw, TIMESTAMP_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S"))
        .map_err(|e| Error::Format(format!("unparseable timestamp '{raw}': {e}")))
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<TimeSeriesFrame> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<TimeSeriesFrame> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column_of = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column '{name}' not in CSV header")))
    };
    let ts_col = column_of(&schema.timestamp_column)?;
    let mapping: Vec<(usize, String)> = if schema.channels.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != ts_col)
            .map(|(i, h)| (i, h.to_string()))
            .collect()
    } else {
        schema
            .channels
            .iter()
            .map(|m| Ok((column_of(&m.column)?, m.name.clone())))
            .collect::<Result<_>>()?
    };
    if !mapping.iter().any(|(_, name)| *name == schema.target) {
        return Err(Error::Schema(format!(
            "target channel '{}' is not mapped by the schema",
            schema.target
        )));
    }

    let mut timestamps: Vec<NaiveDateTime> = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); mapping.len()];
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let ts = parse_timestamp(record.get(ts_col).unwrap_or(""))?;
        if let Some(&prev) = timestamps.last() {
            let delta = ts - prev;
            if delta <= chrono::TimeDelta::zero() {
                return Err(Error::Ordering(format!(
                    "row {} timestamp {ts} does not follow {prev}",
                    line + 2
                )));
            }
            if delta.num_seconds() % STEP.num_seconds() != 0 {
                return Err(Error::Format(format!(
                    "row {} timestamp {ts} is off the hourly grid",
                    line + 2
                )));
            }
            let gap = delta.num_seconds() / STEP.num_seconds() - 1;
            for k in 1..=gap {
                timestamps.push(prev + STEP * k as i32);
                columns.iter_mut().for_each(|c| c.push(None));
            }
        }
        timestamps.push(ts);
        for ((col, name), values) in mapping.iter().zip(columns.iter_mut()) {
            let cell = record.get(*col).unwrap_or("");
            values.push(parse_cell(cell, name, line + 2)?);
        }
    }

    let channels = mapping
        .into_iter()
        .zip(columns)
        .map(|((_, name), values)| Channel::new(name, values))
        .collect();
    TimeSeriesFrame::new(timestamps, channels, &schema.target)
}

fn parse_cell(cell: &str, channel: &str, row: usize) -> Result<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| Error::Format(format!("row {row}, channel '{channel}': '{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Format(format!(
            "row {row}, channel '{channel}': non-finite value '{cell}'"
        )));
    }
    Ok(Some(v))
}

/// Writes the frame in the layout [`read_csv`] accepts, with a `timestamp`
/// column.
pub fn write_csv<W: Write>(frame: &TimeSeriesFrame, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![default_timestamp_column()];
    header.extend(frame.channels().iter().map(|c| c.name.clone()));
    wtr.write_record(&header)?;
    for (i, ts) in frame.timestamps().iter().enumerate() {
        let mut row = vec![ts.format(TIMESTAMP_FORMAT).to_string()];
        row.extend(
            frame
                .channels()
                .iter()
                .map(|c| c.values[i].map(|v| v.to_string()).unwrap_or_default()),
        );
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
