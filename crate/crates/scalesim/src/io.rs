//! Trace, catalog and demand-series file formats.
//!
//! Traces are CSV with the header `timestamp,instance_type,utilization`.
//! Timestamps are either integer epoch seconds or RFC 3339 date-times.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use scalesim_core::{DemandSeries, InstanceCatalog, TraceError, TracePoint};
use serde::Deserialize;

use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 3] = ["timestamp", "instance_type", "utilization"];
pub const DEMAND_HEADER: [&str; 2] = ["timestamp", "demand_cores"];

pub fn parse_timestamp(field: &str) -> Result<i64, String> {
    let field = field.trim();
    if let Ok(secs) = field.parse::<i64>() {
        return Ok(secs);
    }
    DateTime::parse_from_rfc3339(field)
        .map(|t| t.timestamp())
        .map_err(|e| format!("timestamp `{field}`: {e}"))
}

pub fn format_timestamp(secs: i64) -> String {
    match DateTime::<Utc>::from_timestamp(secs, 0) {
        Some(t) => t.to_rfc3339_opts(SecondsFormat::Secs, true),
        None => secs.to_string(),
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::Trace(TraceError::MalformedRow { line, reason: reason.into() })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Column positions of `names` in `headers`.
fn columns<const N: usize>(headers: &csv::StringRecord, names: [&str; N]) -> Result<[usize; N]> {
    let mut idx = [0; N];
    for (slot, name) in idx.iter_mut().zip(names) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| malformed(1, format!("missing column `{name}`")))?;
    }
    Ok(idx)
}

/// Reads every row of a trace, in file order.
pub fn parse_trace<R: Read>(source: R) -> Result<Vec<TracePoint>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(TraceError::EmptyTrace.into());
    }
    let [ts, ty, util] = columns(&headers, TRACE_HEADER)?;
    let mut points = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| malformed(line, e.to_string()))?;
        let field = |c: usize| row.get(c).ok_or_else(|| malformed(line, "missing column"));
        let timestamp = parse_timestamp(field(ts)?).map_err(|e| malformed(line, e))?;
        let instance_type = field(ty)?;
        if instance_type.is_empty() {
            return Err(malformed(line, "empty instance_type"));
        }
        let utilization: f64 = field(util)?
            .parse()
            .map_err(|e| malformed(line, format!("utilization: {e}")))?;
        let point = TracePoint::new(timestamp, instance_type, utilization).map_err(|e| match e {
            TraceError::MalformedRow { reason, .. } => malformed(line, reason),
            other => other.into(),
        })?;
        points.push(point);
    }
    if points.is_empty() {
        return Err(TraceError::EmptyTrace.into());
    }
    Ok(points)
}

pub fn read_trace(path: &Path) -> Result<Vec<TracePoint>> {
    parse_trace(open(path)?)
}

/// Writes a trace with RFC 3339 timestamps.
pub fn write_trace<W: Write>(points: &[TracePoint], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRACE_HEADER)?;
    for p in points {
        w.write_record([format_timestamp(p.timestamp), p.instance_type.clone(), p.utilization.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<trace>", e))?;
    Ok(())
}

pub fn write_trace_file(points: &[TracePoint], path: &Path) -> Result<()> {
    write_trace(points, create(path)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CatalogFile {
    Nested { vcpus: BTreeMap<String, u32> },
    Flat(BTreeMap<String, u32>),
}

/// Parses a TOML catalog, either flat (`"c5.xlarge" = 4`) or under a
/// `[vcpus]` table.
pub fn parse_catalog(text: &str) -> Result<InstanceCatalog> {
    let map = match toml::from_str::<CatalogFile>(text)? {
        CatalogFile::Nested { vcpus } | CatalogFile::Flat(vcpus) => vcpus,
    };
    if let Some((name, _)) = map.iter().find(|(_, v)| **v == 0) {
        return Err(Error::Config(format!("instance type `{name}` has zero vCPUs")));
    }
    Ok(map.into_iter().collect())
}

pub fn read_catalog(path: &Path) -> Result<InstanceCatalog> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_catalog(&text)
}

/// Writes `timestamp,demand_cores`; values use the shortest representation
/// that parses back to the same `f64`.
pub fn write_demand<W: Write>(series: &DemandSeries, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(DEMAND_HEADER)?;
    for (i, v) in series.values().iter().enumerate() {
        w.write_record([series.timestamp(i).to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<demand>", e))?;
    Ok(())
}

/// Reads a series written by [`write_demand`]; the step is taken from the
/// first two timestamps and every row must sit on that grid.
pub fn parse_demand<R: Read>(source: R) -> Result<DemandSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let [ts, val] = columns(&headers, DEMAND_HEADER)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| malformed(line, e.to_string()))?;
        let t = parse_timestamp(row.get(ts).unwrap_or("")).map_err(|e| malformed(line, e))?;
        let v: f64 = row
            .get(val)
            .unwrap_or("")
            .parse()
            .map_err(|e| malformed(line, format!("demand_cores: {e}")))?;
        times.push(t);
        values.push(v);
    }
    let Some(&start) = times.first() else {
        return Err(TraceError::EmptyTrace.into());
    };
    let step = if times.len() > 1 { times[1] - start } else { scalesim_core::trace::DEFAULT_STEP };
    for (i, &t) in times.iter().enumerate() {
        if t != start + i as i64 * step {
            return Err(TraceError::GridGap { timestamp: start + i as i64 * step }.into());
        }
    }
    Ok(DemandSeries::new(start, step, values)?)
}

pub fn read_demand(path: &Path) -> Result<DemandSeries> {
    parse_demand(open(path)?)
}

pub fn write_demand_file(series: &DemandSeries, path: &Path) -> Result<()> {
    write_demand(series, create(path)?)
}
