//! Trace points, instance catalogs and the derived core-demand series.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Default sampling grain of the monitoring traces, in seconds.
pub const DEFAULT_STEP: i64 = 60;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceError {
    /// A row could not be turned into a trace point.
    MalformedRow { line: usize, reason: String },
    EmptyTrace,
    UnknownInstanceType(String),
    /// A grid step has no observation and the fill policy forbids inventing one.
    GridGap { timestamp: i64 },
    /// Input timestamps go backwards.
    Unsorted { timestamp: i64 },
    SplitOutOfRange { split: i64, start: i64, end: i64 },
    InvalidStep(i64),
    InvalidDemand { index: usize, value: f64 },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::MalformedRow { line, reason } => write!(f, "malformed row at line {line}: {reason}"),
            TraceError::EmptyTrace => f.write_str("trace contains no observations"),
            TraceError::UnknownInstanceType(t) => write!(f, "instance type `{t}` has no vCPU entry in the catalog"),
            TraceError::GridGap { timestamp } => write!(f, "no observation for grid step at t={timestamp}"),
            TraceError::Unsorted { timestamp } => write!(f, "timestamps not sorted at t={timestamp}"),
            TraceError::SplitOutOfRange { split, start, end } => {
                write!(f, "split timestamp {split} is not strictly inside ({start}, {end}]")
            }
            TraceError::InvalidStep(s) => write!(f, "step must be positive, got {s}"),
            TraceError::InvalidDemand { index, value } => write!(f, "demand[{index}] = {value} is not a finite non-negative value"),
        }
    }
}

impl core::error::Error for TraceError {}

/// One monitoring observation.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    pub instance_type: String,
    /// CPU utilization in percent, `0..=100`.
    pub utilization: f64,
}

impl TracePoint {
    pub fn new(timestamp: i64, instance_type: impl Into<String>, utilization: f64) -> Result<Self, TraceError> {
        if !(0.0..=100.0).contains(&utilization) {
            return Err(TraceError::MalformedRow {
                line: 0,
                reason: alloc::format!("utilization {utilization} outside [0, 100]"),
            });
        }
        Ok(Self { timestamp, instance_type: instance_type.into(), utilization })
    }
}

/// Maps instance type names to their vCPU count.
///
/// An optional fallback answers for types that are not listed; without one an
/// unknown type is an error.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceCatalog {
    entries: BTreeMap<String, u32>,
    fallback: Option<u32>,
}

impl InstanceCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, instance_type: impl Into<String>, vcpus: u32) -> &mut Self {
        self.entries.insert(instance_type.into(), vcpus);
        self
    }

    pub fn with_fallback(mut self, vcpus: u32) -> Self {
        self.fallback = Some(vcpus);
        self
    }

    pub fn set_fallback(&mut self, vcpus: Option<u32>) {
        self.fallback = vcpus;
    }

    pub fn vcpus(&self, instance_type: &str) -> Result<u32, TraceError> {
        self.entries
            .get(instance_type)
            .copied()
            .or(self.fallback)
            .ok_or_else(|| TraceError::UnknownInstanceType(instance_type.into()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, u32)> for InstanceCatalog {
    fn from_iter<I: IntoIterator<Item = (S, u32)>>(iter: I) -> Self {
        let entries = iter.into_iter().map(|(k, v)| (k.into(), v)).collect();
        Self { entries, fallback: None }
    }
}

/// How `normalize_grid` treats a grid step with no observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    Error,
    #[default]
    PreviousValue,
    Linear,
}

/// Core demand on a regular time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSeries {
    start: i64,
    step: i64,
    demand: Vec<f64>,
}

impl DemandSeries {
    pub fn new(start: i64, step: i64, demand: Vec<f64>) -> Result<Self, TraceError> {
        if step <= 0 {
            return Err(TraceError::InvalidStep(step));
        }
        if demand.is_empty() {
            return Err(TraceError::EmptyTrace);
        }
        if let Some((index, &value)) = demand.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(TraceError::InvalidDemand { index, value });
        }
        Ok(Self { start, step, demand })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn step(&self) -> i64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.demand
    }

    pub fn len(&self) -> usize {
        self.demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demand.is_empty()
    }

    pub fn timestamp(&self, index: usize) -> i64 {
        self.start + index as i64 * self.step
    }

    /// Timestamp of the last sample.
    pub fn end(&self) -> i64 {
        self.timestamp(self.demand.len() - 1)
    }

    /// Multiplies every value by `factor`, e.g. to turn a per-instance
    /// average into fleet-wide demand.
    pub fn scaled(&self, factor: f64) -> Result<Self, TraceError> {
        Self::new(self.start, self.step, self.demand.iter().map(|v| v * factor).collect())
    }

    /// Appends `other`, which must continue this series on the same grid.
    pub fn concat(&self, other: &DemandSeries) -> Result<Self, TraceError> {
        if other.step != self.step {
            return Err(TraceError::InvalidStep(other.step));
        }
        if other.start != self.end() + self.step {
            return Err(TraceError::GridGap { timestamp: self.end() + self.step });
        }
        let mut demand = self.demand.clone();
        demand.extend_from_slice(&other.demand);
        Ok(Self { start: self.start, step: self.step, demand })
    }

    /// Splits into `[start, split)` and `[split, end]`.
    pub fn split_at_timestamp(&self, split_timestamp: i64) -> Result<(Self, Self), TraceError> {
        let out_of_range = TraceError::SplitOutOfRange { split: split_timestamp, start: self.start, end: self.end() };
        if split_timestamp <= self.start || split_timestamp > self.end() {
            return Err(out_of_range);
        }
        // first index whose timestamp is >= split
        let offset = split_timestamp - self.start;
        let index = ((offset + self.step - 1) / self.step) as usize;
        if index == 0 || index >= self.demand.len() {
            return Err(out_of_range);
        }
        let (head, tail) = self.demand.split_at(index);
        Ok((
            Self { start: self.start, step: self.step, demand: head.to_vec() },
            Self { start: self.timestamp(index), step: self.step, demand: tail.to_vec() },
        ))
    }
}

/// Splits a series into a training prefix and a prediction suffix.
pub fn split_train_predict(series: &DemandSeries, split_timestamp: i64) -> Result<(DemandSeries, DemandSeries), TraceError> {
    series.split_at_timestamp(split_timestamp)
}

/// Puts sorted observations on a regular grid anchored at the first timestamp.
///
/// Timestamps are snapped to the nearest grid slot; observations sharing a slot
/// are collapsed into one whose utilization is their mean. Empty slots are
/// handled according to `fill`.
pub fn normalize_grid(points: &[TracePoint], step: i64, fill: FillPolicy) -> Result<Vec<TracePoint>, TraceError> {
    if step <= 0 {
        return Err(TraceError::InvalidStep(step));
    }
    let first = points.first().ok_or(TraceError::EmptyTrace)?;
    let origin = first.timestamp;

    // (slot, instance_type of first member, sum, count)
    let mut slots: Vec<(i64, &str, f64, u32)> = Vec::with_capacity(points.len());
    let mut previous = origin;
    for p in points {
        if p.timestamp < previous {
            return Err(TraceError::Unsorted { timestamp: p.timestamp });
        }
        previous = p.timestamp;
        let slot = (p.timestamp - origin + step / 2).div_euclid(step);
        match slots.last_mut() {
            Some(last) if last.0 == slot => {
                last.2 += p.utilization;
                last.3 += 1;
            }
            _ => slots.push((slot, &p.instance_type, p.utilization, 1)),
        }
    }

    let mut out = Vec::with_capacity(slots.last().map_or(0, |s| s.0 as usize + 1));
    let mut prev: Option<(i64, &str, f64)> = None;
    for (slot, instance_type, sum, count) in slots {
        let utilization = sum / f64::from(count);
        if let Some((prev_slot, prev_type, prev_util)) = prev {
            let gap = slot - prev_slot;
            for k in 1..gap {
                let timestamp = origin + (prev_slot + k) * step;
                let filled = match fill {
                    FillPolicy::Error => return Err(TraceError::GridGap { timestamp }),
                    FillPolicy::PreviousValue => prev_util,
                    FillPolicy::Linear => prev_util + (utilization - prev_util) * k as f64 / gap as f64,
                };
                out.push(TracePoint { timestamp, instance_type: prev_type.into(), utilization: filled });
            }
        }
        out.push(TracePoint { timestamp: origin + slot * step, instance_type: instance_type.into(), utilization });
        prev = Some((slot, instance_type, utilization));
    }
    Ok(out)
}

/// Converts gridded utilization samples to cores: `utilization * vcpus / 100`.
pub fn to_demand_series(points: &[TracePoint], catalog: &InstanceCatalog, step: i64) -> Result<DemandSeries, TraceError> {
    if step <= 0 {
        return Err(TraceError::InvalidStep(step));
    }
    let first = points.first().ok_or(TraceError::EmptyTrace)?;
    let mut demand = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let expected = first.timestamp + i as i64 * step;
        if p.timestamp != expected {
            return Err(TraceError::GridGap { timestamp: expected.min(p.timestamp) });
        }
        let vcpus = catalog.vcpus(&p.instance_type)?;
        demand.push(p.utilization * f64::from(vcpus) / 100.0);
    }
    DemandSeries::new(first.timestamp, step, demand)
}
